'use strict';

// Software rasterizer: layout boxes and text fragments to RGBA, then PNG.
// Low deflate effort keeps capture latency down; output stays deterministic
// for a given layout, which the mirror's frame dedup relies on.

const { PNG } = require('pngjs');
const font = require('./font');

class Canvas {
  constructor(width, height) {
    this.width = width;
    this.height = height;
    this.data = Buffer.alloc(width * height * 4, 255);
  }

  fillRect(x, y, w, h, color) {
    if (!color) return;
    const x0 = Math.max(0, Math.round(x));
    const y0 = Math.max(0, Math.round(y));
    const x1 = Math.min(this.width, Math.round(x + w));
    const y1 = Math.min(this.height, Math.round(y + h));
    const [r, g, b] = color;
    for (let yy = y0; yy < y1; yy++) {
      let idx = (yy * this.width + x0) * 4;
      for (let xx = x0; xx < x1; xx++) {
        this.data[idx] = r;
        this.data[idx + 1] = g;
        this.data[idx + 2] = b;
        this.data[idx + 3] = 255;
        idx += 4;
      }
    }
  }

  strokeRect(x, y, w, h, widths, color) {
    const [t, r, b, l] = widths;
    if (t > 0) this.fillRect(x, y, w, t, color);
    if (b > 0) this.fillRect(x, y + h - b, w, b, color);
    if (l > 0) this.fillRect(x, y, l, h, color);
    if (r > 0) this.fillRect(x + w - r, y, r, h, color);
  }

  drawText(x, y, text, fontSize, color, bold) {
    const adv = font.advance(fontSize);
    const gh = font.glyphHeight(fontSize);
    let penX = Math.round(x);
    const penY = Math.round(y);
    for (const ch of text) {
      const bitmap = font.glyph(ch, fontSize, bold);
      this.blitGlyph(penX, penY, bitmap, adv, gh, color);
      penX += adv;
    }
  }

  blitGlyph(x, y, bitmap, w, h, color) {
    const [r, g, b] = color;
    for (let yy = 0; yy < h; yy++) {
      const py = y + yy;
      if (py < 0 || py >= this.height) continue;
      for (let xx = 0; xx < w; xx++) {
        if (!bitmap[yy * w + xx]) continue;
        const px = x + xx;
        if (px < 0 || px >= this.width) continue;
        const idx = (py * this.width + px) * 4;
        this.data[idx] = r;
        this.data[idx + 1] = g;
        this.data[idx + 2] = b;
        this.data[idx + 3] = 255;
      }
    }
  }

  toPNG() {
    const png = new PNG({ width: this.width, height: this.height });
    this.data.copy(png.data);
    return PNG.sync.write(png, { deflateLevel: 1, filterType: 0 });
  }
}

const CHECK = [
  [3, 7], [4, 8], [5, 7], [6, 6], [7, 5], [8, 4],
];

function paintElement(canvas, el, layout, session) {
  const style = layout.styles.get(el);
  const box = layout.boxes.get(el);
  if (!style || !box || style.display === 'none') return;
  const tag = el.tagName.toLowerCase();
  const type = tag === 'input' ? (el.getAttribute('type') || 'text').toLowerCase() : null;

  if (style.visibility !== 'hidden') {
    canvas.fillRect(box.x, box.y, box.w, box.h, style.background);
    canvas.strokeRect(box.x, box.y, box.w, box.h, style.borderWidth, style.borderColor);

    if (tag === 'input') {
      if (type === 'checkbox' || type === 'radio') {
        if (el.checked) {
          for (const [cx, cy] of CHECK) {
            canvas.fillRect(box.x + cx, box.y + cy, 2, 2, [32, 32, 32]);
          }
        }
      } else if (type === 'range') {
        const min = parseFloat(el.getAttribute('min') || '0');
        const max = parseFloat(el.getAttribute('max') || '100');
        const value = parseFloat(el.value != null && el.value !== '' ? el.value : (min + max) / 2);
        const frac = max > min ? (value - min) / (max - min) : 0;
        canvas.fillRect(box.x, box.y + box.h / 2 - 2, box.w, 4, [198, 198, 198]);
        const thumbX = box.x + Math.round(frac * Math.max(0, box.w - 10));
        canvas.fillRect(thumbX, box.y + 2, 10, box.h - 4, [0, 117, 255]);
      } else if (type !== 'submit' && type !== 'button' && type !== 'reset' && type !== 'image') {
        const raw = el.value != null ? String(el.value) : '';
        const text = type === 'password' ? '*'.repeat(raw.length) : raw;
        const fs = style.fontSize;
        const maxChars = Math.max(0, Math.floor((box.w - 8) / font.advance(fs)));
        canvas.drawText(
          box.x + 4,
          box.y + Math.max(0, Math.floor((box.h - font.glyphHeight(fs)) / 2)),
          text.slice(0, maxChars),
          fs, style.color, false,
        );
      } else {
        const label = el.getAttribute('value') || (type === 'submit' ? 'Submit' : '');
        const fs = style.fontSize;
        const tw = font.measure(label, fs);
        canvas.drawText(
          box.x + Math.max(2, Math.floor((box.w - tw) / 2)),
          box.y + Math.max(0, Math.floor((box.h - font.glyphHeight(fs)) / 2)),
          label, fs, style.color, false,
        );
      }
    } else if (tag === 'textarea') {
      const fs = style.fontSize;
      const lines = String(el.value || '').split('\n');
      const lh = Math.ceil(fs * 1.2);
      const maxChars = Math.max(0, Math.floor((box.w - 8) / font.advance(fs)));
      lines.slice(0, Math.floor((box.h - 4) / lh)).forEach((line, i) => {
        canvas.drawText(box.x + 4, box.y + 2 + i * lh, line.slice(0, maxChars), fs, style.color, false);
      });
    } else if (tag === 'select') {
      const fs = style.fontSize;
      const selected = el.selectedIndex >= 0 && el.options && el.options[el.selectedIndex];
      const label = selected ? selected.textContent.trim() : '';
      canvas.drawText(box.x + 4, box.y + Math.max(0, Math.floor((box.h - font.glyphHeight(fs)) / 2)), label, fs, style.color, false);
    }
  }

  for (const child of Array.from(el.children)) {
    paintElement(canvas, child, layout, session);
  }
}

function render(session) {
  const layout = session.ensureLayout();
  const width = Math.max(1, layout.pageWidth);
  const height = Math.max(1, layout.pageHeight);
  const canvas = new Canvas(width, height);

  const doc = session.window.document;
  const body = doc.body;
  if (body) {
    const bodyStyle = layout.styles.get(body);
    if (bodyStyle && bodyStyle.background) {
      canvas.fillRect(0, 0, width, height, bodyStyle.background);
    }
  }
  const htmlStyle = layout.styles.get(doc.documentElement);
  if (htmlStyle && htmlStyle.background) {
    canvas.fillRect(0, 0, width, height, htmlStyle.background);
  }
  if (doc.documentElement) {
    paintElement(canvas, doc.documentElement, layout, session);
  }
  for (const frag of layout.fragments) {
    if (frag.text == null || frag.visible === false) continue;
    canvas.drawText(frag.x, frag.y, frag.text, frag.fontSize, frag.color, frag.bold);
    if (frag.underline) {
      canvas.fillRect(frag.x, frag.y + frag.h - 1, frag.w, 1, frag.color);
    }
  }
  return canvas.toPNG();
}

// Crops the full-page PNG to the viewport at the current scroll offset.
function cropViewport(fullPng, viewport, scrollY) {
  const png = PNG.sync.read(fullPng);
  const outH = Math.min(viewport.height, png.height);
  const outW = Math.min(viewport.width, png.width);
  const maxScroll = Math.max(0, png.height - outH);
  const top = Math.max(0, Math.min(Math.round(scrollY), maxScroll));
  const out = new PNG({ width: outW, height: outH });
  for (let y = 0; y < outH; y++) {
    const srcStart = ((top + y) * png.width) * 4;
    png.data.copy(out.data, y * outW * 4, srcStart, srcStart + outW * 4);
  }
  return PNG.sync.write(out, { deflateLevel: 1, filterType: 0 });
}

module.exports = { render, cropViewport };
