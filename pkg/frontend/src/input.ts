// Pointer, scroll and history capture outside the overlay widgets.
//
// Raw clicks on the screenshot travel as full-page coordinates (client
// scroll offset added). A pressed-and-moved pointer becomes a drag gesture
// sampled as start/move/end events, which is what slider captchas need.

import { DragPhase, InputEventBody } from './protocol.js';
import { EventOut } from './overlay.js';

const DRAG_THRESHOLD_PX = 4;
const DRAG_SAMPLE_MS = 25;
const SCROLL_SAMPLE_MS = 150;

function isWidgetTarget(target: EventTarget | null): boolean {
  if (!(target instanceof Element)) return false;
  const tag = target.tagName;
  return tag === 'INPUT' || tag === 'TEXTAREA' || tag === 'A' || tag === 'SELECT';
}

export class GestureCapture {
  private down: { x: number; y: number } | null = null;
  private dragging = false;
  private lastSample = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly send: EventOut,
    private readonly win: Window,
  ) {
    root.addEventListener('mousedown', this.onDown);
    root.addEventListener('mousemove', this.onMove);
    root.addEventListener('mouseup', this.onUp);
    win.addEventListener('scroll', this.onScroll, { passive: true });
  }

  dispose(): void {
    this.root.removeEventListener('mousedown', this.onDown);
    this.root.removeEventListener('mousemove', this.onMove);
    this.root.removeEventListener('mouseup', this.onUp);
    this.win.removeEventListener('scroll', this.onScroll);
  }

  private pageXY(event: MouseEvent): { x: number; y: number } {
    return {
      x: Math.max(0, Math.round(event.clientX + this.win.scrollX)),
      y: Math.max(0, Math.round(event.clientY + this.win.scrollY)),
    };
  }

  private onDown = (event: MouseEvent): void => {
    if (event.button !== 0 || isWidgetTarget(event.target)) return;
    this.down = this.pageXY(event);
    this.dragging = false;
  };

  private onMove = (event: MouseEvent): void => {
    if (!this.down) return;
    const at = this.pageXY(event);
    if (!this.dragging) {
      const moved = Math.abs(at.x - this.down.x) + Math.abs(at.y - this.down.y);
      if (moved < DRAG_THRESHOLD_PX) return;
      this.dragging = true;
      this.sendDrag(this.down, 'start');
      this.lastSample = Date.now();
    }
    if (Date.now() - this.lastSample >= DRAG_SAMPLE_MS) {
      this.sendDrag(at, 'move');
      this.lastSample = Date.now();
    }
  };

  private onUp = (event: MouseEvent): void => {
    if (event.button !== 0 || !this.down) return;
    const at = this.pageXY(event);
    if (this.dragging) {
      this.sendDrag(at, 'end');
    } else if (!isWidgetTarget(event.target)) {
      this.send({ kind: 'click', x: at.x, y: at.y });
    }
    this.down = null;
    this.dragging = false;
  };

  private sendDrag(at: { x: number; y: number }, phase: DragPhase): void {
    this.send({ kind: 'dragMove', x: at.x, y: at.y, phase });
  }

  private scrollTimer: ReturnType<typeof setTimeout> | null = null;

  private onScroll = (): void => {
    if (this.scrollTimer !== null) return;
    this.scrollTimer = setTimeout(() => {
      this.scrollTimer = null;
      this.send({
        kind: 'scroll',
        x: Math.round(this.win.scrollX),
        y: Math.round(this.win.scrollY),
      });
    }, SCROLL_SAMPLE_MS);
  };
}

/**
 * Keeps the address bar on the proxy host in step with the mirrored site's
 * path and turns browser back/forward into history events for the server.
 */
export class HistoryMirror {
  private index = 0;
  private lastPath: string | null = null;
  private lastBack = 0;
  private suppress = 0;

  constructor(
    private readonly win: Window,
    private readonly send: EventOut,
    private readonly enabled: boolean = true,
  ) {
    if (!enabled) return;
    try {
      this.win.history.replaceState({ mcIdx: 0 }, '');
    } catch {
      // sandboxed test documents may refuse; degrade silently
    }
    this.win.addEventListener('popstate', this.onPop);
  }

  dispose(): void {
    if (this.enabled) this.win.removeEventListener('popstate', this.onPop);
  }

  applyView(displayPath: string, historyBack: number): void {
    if (!this.enabled) return;
    try {
      if (this.lastPath !== null && displayPath !== this.lastPath && historyBack > this.lastBack) {
        this.index += 1;
        this.win.history.pushState({ mcIdx: this.index }, '', displayPath);
      } else {
        this.win.history.replaceState({ mcIdx: this.index }, '', displayPath);
      }
    } catch {
      // different-origin test harnesses cannot rewrite the URL; fine
    }
    this.lastPath = displayPath;
    this.lastBack = historyBack;
  }

  private onPop = (event: PopStateEvent): void => {
    const target: number = event.state?.mcIdx ?? 0;
    const delta = target - this.index;
    this.index = target;
    for (let i = 0; i < Math.abs(delta); i++) {
      this.send({ kind: delta < 0 ? 'historyBack' : 'historyForward' });
    }
  };
}

export type { InputEventBody };
