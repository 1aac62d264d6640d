// Wire protocol (version 1), mirroring the server's codec.
//
// Text frames are JSON envelopes {v, channel, kind, seq, body}; the only
// binary frames are screenshots: an 8-byte big-endian sequence number
// followed by PNG bytes. Sequence numbers run 1,2,3,... per channel and
// direction; anything else is a protocol violation and the session dies.

export const PROTOCOL_VERSION = 1;

export type Channel = 'view' | 'cmd';

export type MessageKind =
  | 'hello'
  | 'input'
  | 'ready'
  | 'error'
  | 'screenshot'
  | 'view';

export type InputKind =
  | 'click'
  | 'keyPress'
  | 'textChanged'
  | 'paste'
  | 'scroll'
  | 'navigate'
  | 'historyBack'
  | 'historyForward'
  | 'dragMove';

export type DragPhase = 'start' | 'move' | 'end';

export type ElementKind = 'textBox' | 'button' | 'hyperlink';

export interface UIElement {
  elementId: string;
  kind: ElementKind;
  x: number;
  y: number;
  width: number;
  height: number;
  text: string;
  href?: string;
  focused: boolean;
  /** original control type for text boxes ("text", "password", "textarea") */
  inputType?: string;
}

export interface ViewMeta {
  sequence: number;
  imageWidth: number;
  imageHeight: number;
  imageSeq: number | null;
  elements: UIElement[];
  pageTitle: string;
  faviconPath: string;
  displayPath: string;
  historyDepth: [number, number];
}

export interface InputEventBody {
  kind: InputKind;
  x?: number;
  y?: number;
  key?: string;
  elementId?: string;
  text?: string;
  url?: string;
  phase?: DragPhase;
  timestampMs: number;
}

export interface HelloBody {
  viewportWidth: number;
  viewportHeight: number;
  initialPath: string;
}

export interface ReadyBody {
  sessionId: string;
}

export interface ErrorBody {
  code: string;
  message: string;
}

export interface ScreenshotFrame {
  kind: 'screenshot';
  sequence: number;
  image: Uint8Array;
}

export interface TextFrame {
  kind: Exclude<MessageKind, 'screenshot'>;
  channel: Channel;
  sequence: number;
  body: Record<string, unknown>;
}

export type DecodedFrame = ScreenshotFrame | TextFrame;

export class ProtocolError extends Error {}

/** A full render cycle ready for display. */
export interface EnrichedView {
  meta: ViewMeta;
  /** null = pixel-identical to the previous frame, reuse it */
  image: Uint8Array | null;
}

export function decodeBinaryFrame(data: ArrayBuffer | Uint8Array): ScreenshotFrame {
  const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
  if (bytes.byteLength < 9) {
    throw new ProtocolError('binary frame truncated');
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const sequence = Number(view.getBigUint64(0));
  return { kind: 'screenshot', sequence, image: bytes.slice(8) };
}

const KNOWN_KINDS: readonly MessageKind[] = [
  'hello', 'input', 'ready', 'error', 'screenshot', 'view',
];

export function decodeTextFrame(data: string): TextFrame {
  let parsed: any;
  try {
    parsed = JSON.parse(data);
  } catch {
    throw new ProtocolError('text frame is not JSON');
  }
  if (parsed === null || typeof parsed !== 'object') {
    throw new ProtocolError('text frame is not an object');
  }
  if (parsed.v !== PROTOCOL_VERSION) {
    throw new ProtocolError(`unsupported protocol version ${parsed.v}`);
  }
  const kind = parsed.kind;
  if (!KNOWN_KINDS.includes(kind)) {
    // unknown kinds are skippable, not fatal; the caller decides
    throw new UnknownKindError(`unknown kind ${String(kind)}`);
  }
  if (kind === 'screenshot') {
    throw new ProtocolError('screenshot bodies must ride binary frames');
  }
  if (typeof parsed.seq !== 'number' || parsed.seq < 1) {
    throw new ProtocolError(`bad sequence ${parsed.seq}`);
  }
  if (parsed.channel !== 'view' && parsed.channel !== 'cmd') {
    throw new ProtocolError(`unknown channel ${parsed.channel}`);
  }
  if (parsed.body === null || typeof parsed.body !== 'object') {
    throw new ProtocolError('body is not an object');
  }
  return { kind, channel: parsed.channel, sequence: parsed.seq, body: parsed.body };
}

export class UnknownKindError extends ProtocolError {}

export function encodeTextFrame(
  channel: Channel,
  kind: MessageKind,
  sequence: number,
  body: Record<string, unknown>,
): string {
  return JSON.stringify({
    v: PROTOCOL_VERSION,
    channel,
    kind,
    seq: sequence,
    body,
  });
}

export class SequenceAllocator {
  private next = 1;

  take(): number {
    return this.next++;
  }
}

export class SequenceTracker {
  private last = 0;

  observe(sequence: number): void {
    if (sequence !== this.last + 1) {
      throw new ProtocolError(`sequence ${sequence} after ${this.last}`);
    }
    this.last = sequence;
  }
}

export function parseViewMeta(body: Record<string, unknown>): ViewMeta {
  const meta = body as unknown as ViewMeta;
  if (
    typeof meta.sequence !== 'number'
    || typeof meta.imageWidth !== 'number'
    || typeof meta.imageHeight !== 'number'
    || !Array.isArray(meta.elements)
    || typeof meta.displayPath !== 'string'
  ) {
    throw new ProtocolError('bad view body');
  }
  return {
    ...meta,
    imageSeq: (body as any).imageSeq ?? null,
    elements: meta.elements.map((el: any) => ({
      elementId: el.elementId,
      kind: el.kind,
      x: el.x,
      y: el.y,
      width: el.width,
      height: el.height,
      text: el.text ?? '',
      href: el.href,
      focused: Boolean(el.focused),
      inputType: el.inputType,
    })),
  };
}

/**
 * Pairs screenshot frames with their view metadata. Feed every decoded
 * view-channel frame in order; a complete EnrichedView comes back whenever
 * view metadata arrives.
 */
export class ViewAssembler {
  private tracker = new SequenceTracker();
  private pending: ScreenshotFrame | null = null;
  lastImage: Uint8Array | null = null;

  feed(frame: DecodedFrame): EnrichedView | null {
    this.tracker.observe(frame.sequence);
    if (frame.kind === 'screenshot') {
      this.pending = frame;
      return null;
    }
    if (frame.kind !== 'view') {
      throw new ProtocolError(`${frame.kind} on the view channel`);
    }
    const meta = parseViewMeta(frame.body);
    let image: Uint8Array | null = null;
    if (meta.imageSeq === null) {
      if (this.lastImage === null) {
        throw new ProtocolError('view reuses an image before any was sent');
      }
    } else {
      if (this.pending === null || this.pending.sequence !== meta.imageSeq) {
        throw new ProtocolError(`view references image ${meta.imageSeq} which is not pending`);
      }
      image = this.pending.image;
      this.lastImage = image;
      this.pending = null;
    }
    return { meta, image };
  }
}
