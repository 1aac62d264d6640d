// Native widgets positioned over the screenshot at descriptor coordinates.
//
// Text boxes are real inputs (so password managers, IMEs and mobile
// keyboards behave), hyperlinks are real anchors (status bar, middle-click),
// buttons are real buttons for focus order. Styling is transparent so the
// screenshot pixels underneath provide the visuals; a widget never paints
// outside its descriptor box.

import { InputEventBody, UIElement } from './protocol.js';

export type EventOut = (body: Omit<InputEventBody, 'timestampMs'>) => void;

const BASE_STYLE = 'position:absolute;margin:0;box-sizing:border-box;';

function applyBox(widget: HTMLElement, el: UIElement): void {
  widget.style.left = `${el.x}px`;
  widget.style.top = `${el.y}px`;
  widget.style.width = `${el.width}px`;
  widget.style.height = `${el.height}px`;
}

function fontSizeFor(el: UIElement): number {
  return Math.max(9, Math.floor(el.height * 0.6));
}

export class OverlayLayer {
  private widgets = new Map<string, HTMLElement>();
  private elements = new Map<string, UIElement>();

  constructor(
    private readonly container: HTMLElement,
    private readonly send: EventOut,
  ) {}

  widget(elementId: string): HTMLElement | undefined {
    return this.widgets.get(elementId);
  }

  get count(): number {
    return this.widgets.size;
  }

  /** Reconciles the widget set against a fresh descriptor list. */
  apply(elements: UIElement[]): void {
    const doc = this.container.ownerDocument;
    const seen = new Set<string>();
    for (const el of elements) {
      seen.add(el.elementId);
      let widget = this.widgets.get(el.elementId);
      const recyclable = widget !== undefined
        && (widget as any).__mcKind === el.kind
        && (widget as any).__mcInputType === (el.inputType ?? null);
      if (!recyclable) {
        widget?.remove();
        widget = this.create(doc, el);
        this.widgets.set(el.elementId, widget);
        this.container.appendChild(widget);
      }
      this.update(widget!, el, doc);
      this.elements.set(el.elementId, el);
    }
    for (const [id, widget] of [...this.widgets]) {
      if (!seen.has(id)) {
        widget.remove();
        this.widgets.delete(id);
        this.elements.delete(id);
      }
    }
  }

  private create(doc: Document, el: UIElement): HTMLElement {
    let widget: HTMLElement;
    switch (el.kind) {
      case 'textBox': {
        const input = doc.createElement(
          el.inputType === 'textarea' ? 'textarea' : 'input',
        ) as HTMLInputElement | HTMLTextAreaElement;
        if (input.tagName === 'INPUT') {
          (input as HTMLInputElement).type =
            el.inputType === 'password' ? 'password' : 'text';
        }
        input.autocomplete = el.inputType === 'password' ? 'current-password' : 'on';
        input.addEventListener('input', (event) => {
          const native = event as InputEvent;
          const value = (input as HTMLInputElement).value;
          const pasted = typeof native.inputType === 'string'
            && native.inputType.startsWith('insertFromPaste');
          this.send({
            kind: pasted ? 'paste' : 'textChanged',
            elementId: el.elementId,
            text: value,
          });
        });
        input.addEventListener('keydown', (event) => {
          const key = (event as KeyboardEvent).key;
          if (key === 'Enter' && el.inputType !== 'textarea') {
            event.preventDefault();
            this.send({ kind: 'keyPress', key: 'Enter' });
          }
        });
        widget = input;
        break;
      }
      case 'hyperlink': {
        if (el.href !== undefined && el.href !== null) {
          const anchor = doc.createElement('a');
          anchor.addEventListener('click', (event) => {
            event.preventDefault();
            event.stopPropagation();
            const current = this.elements.get(el.elementId);
            if (current?.href) {
              this.send({ kind: 'navigate', url: current.href });
            }
          });
          widget = anchor;
        } else {
          // script-handled clickable: forward raw coordinates instead so the
          // page's own handler runs server-side
          widget = doc.createElement('div');
          widget.setAttribute('data-mc-clickthrough', '1');
        }
        break;
      }
      case 'button':
      default: {
        const button = doc.createElement('button');
        button.type = 'button';
        // activation lands as a coordinate click at the widget centre
        button.addEventListener('keydown', (event) => {
          const key = (event as KeyboardEvent).key;
          if (key === 'Enter' || key === ' ') {
            event.preventDefault();
            const current = this.elements.get(el.elementId)!;
            this.send({
              kind: 'click',
              x: Math.round(current.x + current.width / 2),
              y: Math.round(current.y + current.height / 2),
            });
          }
        });
        widget = button;
        break;
      }
    }
    (widget as any).__mcKind = el.kind;
    (widget as any).__mcInputType = el.inputType ?? null;
    widget.setAttribute('data-mc-id', el.elementId);
    widget.setAttribute(
      'style',
      BASE_STYLE
        + 'background:transparent;border:none;outline-offset:-2px;'
        + (el.kind === 'hyperlink' ? 'display:block;cursor:pointer;' : '')
        + (el.kind === 'button' ? 'color:transparent;cursor:pointer;' : '')
        + (el.kind === 'textBox' ? 'color:#000;font-family:inherit;padding:0 3px;' : ''),
    );
    return widget;
  }

  private update(widget: HTMLElement, el: UIElement, doc: Document): void {
    applyBox(widget, el);
    widget.style.fontSize = `${fontSizeFor(el)}px`;
    if (el.kind === 'textBox') {
      const input = widget as HTMLInputElement;
      // never clobber what the viewer is typing right now; the server state
      // converges on the next settled view
      if (doc.activeElement !== input && input.value !== el.text) {
        input.value = el.text;
      }
      if (el.focused && (doc.activeElement === doc.body || doc.activeElement === null)) {
        input.focus();
      }
    } else if (el.kind === 'hyperlink' && el.href) {
      (widget as HTMLAnchorElement).setAttribute?.('href', el.href);
      widget.setAttribute('aria-label', el.text);
    } else if (el.kind === 'button') {
      widget.textContent = el.text;
      widget.setAttribute('aria-label', el.text);
    }
  }
}
