'use strict';

// Glyph access for the embedded 8x16 bitmap font. Glyphs are scaled with
// nearest-neighbour sampling to the requested font size; metrics are cell
// based so text measurement stays integral and deterministic.

const { REGULAR, BOLD } = require('./fontdata');

const CELL_W = 8;
const CELL_H = 16;
const FIRST = 32;
const LAST = 126;

const cache = new Map();

function advance(fontSize) {
  return Math.max(3, Math.round(fontSize / 2));
}

function glyphHeight(fontSize) {
  return Math.max(6, Math.round(fontSize));
}

function decodeGlyph(table, code) {
  const hex = table[code - FIRST];
  const rows = new Uint8Array(CELL_H);
  for (let y = 0; y < CELL_H; y++) {
    rows[y] = parseInt(hex.slice(y * 2, y * 2 + 2), 16);
  }
  return rows;
}

// Returns a Uint8Array bitmap (w*h, 0 or 1) for one character.
function glyph(ch, fontSize, bold) {
  let code = ch.codePointAt(0);
  if (code < FIRST || code > LAST) code = 0x3f; // '?' for non-ASCII
  const w = advance(fontSize);
  const h = glyphHeight(fontSize);
  const key = `${code}/${w}x${h}/${bold ? 1 : 0}`;
  let bitmap = cache.get(key);
  if (bitmap) return bitmap;
  const rows = decodeGlyph(bold ? BOLD : REGULAR, code);
  bitmap = new Uint8Array(w * h);
  for (let y = 0; y < h; y++) {
    const srcY = Math.min(CELL_H - 1, Math.floor((y * CELL_H) / h));
    const rowBits = rows[srcY];
    for (let x = 0; x < w; x++) {
      const srcX = Math.min(CELL_W - 1, Math.floor((x * CELL_W) / w));
      if (rowBits & (0x80 >> srcX)) bitmap[y * w + x] = 1;
    }
  }
  cache.set(key, bitmap);
  return bitmap;
}

function measure(text, fontSize) {
  return text.length * advance(fontSize);
}

module.exports = { advance, glyphHeight, glyph, measure };
