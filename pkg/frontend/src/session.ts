// Session lifecycle: the two sockets, the hello handshake, and the render
// loop applying each assembled view to the canvas, overlays, title, favicon
// and address path.

import {
  EnrichedView,
  HelloBody,
  InputEventBody,
  ProtocolError,
  SequenceAllocator,
  SequenceTracker,
  UnknownKindError,
  ViewAssembler,
  decodeBinaryFrame,
  decodeTextFrame,
  encodeTextFrame,
} from './protocol.js';
import { CanvasSink, FrameSink } from './render.js';
import { OverlayLayer } from './overlay.js';
import { GestureCapture, HistoryMirror } from './input.js';

export interface SessionOptions {
  /** http(s) origin of the mirror server, e.g. "http://host:8080" */
  baseUrl: string;
  token: string;
  root: HTMLElement;
  doc: Document;
  win: Window;
  initialPath?: string;
  viewport?: { width: number; height: number };
  sink?: FrameSink;
  webSocketImpl?: typeof WebSocket;
  /** address-bar/history mirroring; off in harnesses that cannot pushState */
  manageHistory?: boolean;
  captureGestures?: boolean;
}

export type ViewListener = (view: EnrichedView) => void;

export class MirrorSession {
  readonly overlay: OverlayLayer;
  readonly sink: FrameSink;
  sessionId = '';
  closed = false;
  lastError = '';

  private viewWs!: WebSocket;
  private cmdWs!: WebSocket;
  private readonly assembler = new ViewAssembler();
  private readonly cmdIn = new SequenceTracker();
  private readonly out = new SequenceAllocator();
  private readonly listeners: ViewListener[] = [];
  private readonly history: HistoryMirror;
  private gestures: GestureCapture | null = null;
  private renderChain: Promise<void> = Promise.resolve();

  constructor(private readonly options: SessionOptions) {
    const doc = options.doc;
    if (options.sink) {
      this.sink = options.sink;
    } else {
      const canvas = doc.createElement('canvas');
      canvas.setAttribute('style', 'position:absolute;left:0;top:0;display:block;');
      options.root.appendChild(canvas);
      this.sink = new CanvasSink(canvas);
    }
    const overlayHost = doc.createElement('div');
    overlayHost.setAttribute('id', 'mc-overlay');
    overlayHost.setAttribute('style', 'position:absolute;left:0;top:0;');
    options.root.appendChild(overlayHost);
    this.overlay = new OverlayLayer(overlayHost, (body) => this.sendEvent(body));
    this.history = new HistoryMirror(
      options.win,
      (body) => this.sendEvent(body),
      options.manageHistory ?? true,
    );
    if (options.captureGestures ?? true) {
      this.gestures = new GestureCapture(options.root, (body) => this.sendEvent(body), options.win);
    }
  }

  onView(listener: ViewListener): void {
    this.listeners.push(listener);
  }

  connect(): Promise<void> {
    const WS = this.options.webSocketImpl
      ?? (this.options.win as Window & typeof globalThis).WebSocket;
    const wsBase = this.options.baseUrl.replace(/^http/, 'ws');
    this.viewWs = new WS(`${wsBase}/__ws/view?t=${this.options.token}`);
    this.cmdWs = new WS(`${wsBase}/__ws/cmd?t=${this.options.token}`);
    this.viewWs.binaryType = 'arraybuffer';

    this.viewWs.addEventListener('message', (event: MessageEvent) => {
      this.onViewFrame(event.data);
    });
    this.cmdWs.addEventListener('message', (event: MessageEvent) => {
      this.onCmdFrame(event.data);
    });
    for (const ws of [this.viewWs, this.cmdWs]) {
      ws.addEventListener('close', () => {
        this.closed = true;
      });
    }

    return new Promise((resolve, reject) => {
      let open = 0;
      const ready = () => {
        open += 1;
        if (open === 2) {
          this.sendHello();
          resolve();
        }
      };
      this.viewWs.addEventListener('open', ready);
      this.cmdWs.addEventListener('open', ready);
      this.viewWs.addEventListener('error', () => reject(new Error('view channel failed')));
      this.cmdWs.addEventListener('error', () => reject(new Error('command channel failed')));
    });
  }

  private sendHello(): void {
    const viewport = this.options.viewport ?? {
      width: this.options.win.innerWidth,
      height: this.options.win.innerHeight,
    };
    const body: HelloBody = {
      viewportWidth: viewport.width,
      viewportHeight: viewport.height,
      initialPath: this.options.initialPath
        ?? this.options.win.location.pathname + this.options.win.location.search,
    };
    this.cmdWs.send(encodeTextFrame('cmd', 'hello', this.out.take(), body as any));
  }

  sendEvent(body: Omit<InputEventBody, 'timestampMs'>): void {
    if (this.closed) return;
    const stamped: InputEventBody = { ...body, timestampMs: Date.now() };
    this.cmdWs.send(encodeTextFrame('cmd', 'input', this.out.take(), stamped as any));
  }

  private onCmdFrame(data: unknown): void {
    if (typeof data !== 'string') return;
    let frame;
    try {
      frame = decodeTextFrame(data);
    } catch (error) {
      if (error instanceof UnknownKindError) return;
      this.fail(String(error));
      return;
    }
    try {
      this.cmdIn.observe(frame.sequence);
    } catch (error) {
      this.fail(String(error));
      return;
    }
    if (frame.kind === 'ready') {
      this.sessionId = String(frame.body.sessionId ?? '');
    } else if (frame.kind === 'error') {
      this.lastError = String(frame.body.message ?? frame.body.code ?? 'server error');
      this.closed = true;
    }
  }

  private onViewFrame(data: unknown): void {
    let view: EnrichedView | null = null;
    try {
      if (typeof data === 'string') {
        view = this.assembler.feed(decodeTextFrame(data));
      } else {
        view = this.assembler.feed(decodeBinaryFrame(data as ArrayBuffer));
      }
    } catch (error) {
      if (error instanceof UnknownKindError) return;
      // a bad frame must not blank the screen: log, keep the previous view
      this.lastError = String(error);
      return;
    }
    if (view !== null) {
      const toRender = view;
      // strictly ordered rendering; at most one view applied at a time
      this.renderChain = this.renderChain.then(() => this.render(toRender));
    }
  }

  private async render(view: EnrichedView): Promise<void> {
    const { meta, image } = view;
    if (image !== null) {
      this.sink.resize(meta.imageWidth, meta.imageHeight);
      try {
        await this.sink.draw(image);
      } catch (error) {
        this.lastError = `frame decode failed: ${String(error)}`;
        return;
      }
    }
    this.options.root.style.width = `${meta.imageWidth}px`;
    this.options.root.style.height = `${meta.imageHeight}px`;
    this.overlay.apply(meta.elements);
    this.options.doc.title = meta.pageTitle;
    this.applyFavicon(meta.faviconPath);
    this.history.applyView(meta.displayPath, meta.historyDepth[0]);
    for (const listener of this.listeners) {
      listener(view);
    }
  }

  private applyFavicon(path: string): void {
    const doc = this.options.doc;
    let link = doc.querySelector('link#mc-favicon') as HTMLLinkElement | null;
    if (!link) {
      link = doc.createElement('link');
      link.id = 'mc-favicon';
      link.rel = 'icon';
      doc.head.appendChild(link);
    }
    if (link.getAttribute('href') !== path) {
      link.setAttribute('href', path);
    }
  }

  private fail(message: string): void {
    this.lastError = message;
    this.close();
  }

  close(): void {
    this.closed = true;
    this.gestures?.dispose();
    this.history.dispose();
    try {
      this.cmdWs?.close();
      this.viewWs?.close();
    } catch {
      // already gone
    }
  }
}
