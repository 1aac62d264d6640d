// @vitest-environment node
import { describe, expect, it } from 'vitest';
import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';

import {
  ProtocolError,
  SequenceTracker,
  UnknownKindError,
  ViewAssembler,
  decodeBinaryFrame,
  decodeTextFrame,
  encodeTextFrame,
  parseViewMeta,
} from '../src/protocol.js';

const vectorsPath = fileURLToPath(new URL('./vectors.json', import.meta.url));
const vectors: any[] = JSON.parse(readFileSync(vectorsPath, 'utf-8'));

function b64ToBytes(b64: string): Uint8Array {
  return new Uint8Array(Buffer.from(b64, 'base64'));
}

describe('cross-language vectors from the server codec', () => {
  it('decodes every server-encoded frame', () => {
    for (const vector of vectors) {
      if (vector.frameType === 'binary') {
        const frame = decodeBinaryFrame(b64ToBytes(vector.frameB64));
        expect(frame.kind).toBe('screenshot');
        expect(frame.sequence).toBe(vector.seq);
        expect(Buffer.from(frame.image).toString('base64')).toBe(vector.imageB64);
      } else {
        const text = Buffer.from(vector.frameB64, 'base64').toString('utf-8');
        const frame = decodeTextFrame(text);
        expect(frame.kind).toBe(vector.kind);
        expect(frame.channel).toBe(vector.channel);
        expect(frame.sequence).toBe(vector.seq);
        expect(frame.body).toEqual(vector.body);
      }
    }
  });

  it('re-encoded client frames parse back to the same envelope', () => {
    for (const vector of vectors) {
      if (vector.frameType !== 'text' || vector.channel !== 'cmd') continue;
      const encoded = encodeTextFrame(vector.channel, vector.kind, vector.seq, vector.body);
      const decoded = decodeTextFrame(encoded);
      expect(decoded.body).toEqual(vector.body);
      expect(decoded.sequence).toBe(vector.seq);
    }
  });
});

describe('frame discipline', () => {
  it('rejects truncated binary frames', () => {
    expect(() => decodeBinaryFrame(new Uint8Array(4))).toThrow(ProtocolError);
  });

  it('isolates unknown kinds', () => {
    const frame = JSON.stringify({ v: 1, channel: 'cmd', kind: 'zzz', seq: 1, body: {} });
    expect(() => decodeTextFrame(frame)).toThrow(UnknownKindError);
  });

  it('rejects wrong protocol versions and non-json', () => {
    expect(() => decodeTextFrame('{"v":9,"channel":"cmd","kind":"ready","seq":1,"body":{}}'))
      .toThrow(ProtocolError);
    expect(() => decodeTextFrame('nope')).toThrow(ProtocolError);
  });

  it('enforces contiguous sequences', () => {
    const tracker = new SequenceTracker();
    tracker.observe(1);
    tracker.observe(2);
    expect(() => tracker.observe(2)).toThrow(ProtocolError);
    expect(() => tracker.observe(5)).toThrow(ProtocolError);
  });
});

function viewFrame(seq: number, imageSeq: number | null): string {
  return JSON.stringify({
    v: 1,
    channel: 'view',
    kind: 'view',
    seq,
    body: {
      sequence: seq,
      imageWidth: 100,
      imageHeight: 80,
      imageSeq,
      elements: [],
      pageTitle: 't',
      faviconPath: '/__icon/blank',
      displayPath: '/',
      historyDepth: [0, 0],
    },
  });
}

function screenshotFrame(seq: number, payload: number[]): Uint8Array {
  const bytes = new Uint8Array(8 + payload.length);
  new DataView(bytes.buffer).setBigUint64(0, BigInt(seq));
  bytes.set(payload, 8);
  return bytes;
}

describe('view assembly', () => {
  it('pairs screenshots with metadata and reuses on dedup', () => {
    const assembler = new ViewAssembler();
    expect(assembler.feed(decodeBinaryFrame(screenshotFrame(1, [9, 9, 9])))).toBeNull();
    const first = assembler.feed(decodeTextFrame(viewFrame(2, 1)));
    expect(first?.image).toEqual(new Uint8Array([9, 9, 9]));

    const second = assembler.feed(decodeTextFrame(viewFrame(3, null)));
    expect(second?.image).toBeNull();
    expect(assembler.lastImage).toEqual(new Uint8Array([9, 9, 9]));
  });

  it('refuses a dedup view before any image arrived', () => {
    const assembler = new ViewAssembler();
    expect(() => assembler.feed(decodeTextFrame(viewFrame(1, null)))).toThrow(ProtocolError);
  });

  it('parses element descriptors including input types', () => {
    const meta = parseViewMeta({
      sequence: 1,
      imageWidth: 10,
      imageHeight: 10,
      imageSeq: null,
      elements: [{
        elementId: 'e1', kind: 'textBox', x: 1, y: 2, width: 3, height: 4,
        text: 'v', focused: true, inputType: 'password',
      }],
      pageTitle: '',
      faviconPath: '/__icon/blank',
      displayPath: '/',
      historyDepth: [1, 2],
    });
    expect(meta.elements[0].inputType).toBe('password');
    expect(meta.historyDepth).toEqual([1, 2]);
  });
});
