'use strict';

// Box layout for the page engine. Supports the subset of CSS the engine
// renders: block flow with inline runs, inline-block, absolute/relative
// positioning, px/% lengths, margins/padding/borders, and the usual form
// control default sizes. No floats, no flex, no tables, no z-index: paint
// and hit-test order is document order.

const font = require('./font');

const BLOCK_TAGS = new Set([
  'html', 'body', 'div', 'p', 'form', 'ul', 'ol', 'li', 'section', 'header',
  'footer', 'nav', 'main', 'article', 'aside', 'fieldset', 'pre',
  'blockquote', 'h1', 'h2', 'h3', 'h4', 'h5', 'h6', 'hr', 'table', 'tr',
  'figure', 'address', 'dl', 'dt', 'dd',
]);
const INLINE_BLOCK_TAGS = new Set(['input', 'button', 'select', 'textarea', 'img', 'progress', 'meter']);
const SKIP_TAGS = new Set(['head', 'script', 'style', 'title', 'meta', 'link', 'template', 'noscript']);

const HEADING_STYLE = {
  h1: { fontSize: 32, margin: 21, bold: true },
  h2: { fontSize: 24, margin: 20, bold: true },
  h3: { fontSize: 19, margin: 19, bold: true },
  h4: { fontSize: 16, margin: 21, bold: true },
  h5: { fontSize: 13, margin: 22, bold: true },
  h6: { fontSize: 11, margin: 25, bold: true },
};

const NAMED_COLORS = {
  black: [0, 0, 0], white: [255, 255, 255], red: [255, 0, 0],
  green: [0, 128, 0], blue: [0, 0, 255], yellow: [255, 255, 0],
  orange: [255, 165, 0], purple: [128, 0, 128], gray: [128, 128, 128],
  grey: [128, 128, 128], silver: [192, 192, 192], lightgray: [211, 211, 211],
  lightgrey: [211, 211, 211], darkgray: [169, 169, 169], navy: [0, 0, 128],
  teal: [0, 128, 128], maroon: [128, 0, 0], olive: [128, 128, 0],
  lime: [0, 255, 0], aqua: [0, 255, 255], fuchsia: [255, 0, 255],
  whitesmoke: [245, 245, 245], crimson: [220, 20, 60], gold: [255, 215, 0],
  tomato: [255, 99, 71], seagreen: [46, 139, 87], steelblue: [70, 130, 180],
  lightyellow: [255, 255, 224], lavender: [230, 230, 250],
  transparent: null,
};

function parseColor(value) {
  if (value == null) return undefined;
  const v = String(value).trim().toLowerCase();
  if (v in NAMED_COLORS) return NAMED_COLORS[v];
  let m = v.match(/^#([0-9a-f]{3})$/);
  if (m) {
    const h = m[1];
    return [0, 1, 2].map((i) => parseInt(h[i] + h[i], 16));
  }
  m = v.match(/^#([0-9a-f]{6})$/);
  if (m) {
    const h = m[1];
    return [0, 2, 4].map((i) => parseInt(h.slice(i, i + 2), 16));
  }
  m = v.match(/^rgba?\(([^)]+)\)$/);
  if (m) {
    const parts = m[1].split(',').map((s) => parseFloat(s));
    if (parts.length >= 3) {
      if (parts.length === 4 && parts[3] === 0) return null;
      return parts.slice(0, 3).map((n) => Math.max(0, Math.min(255, Math.round(n))));
    }
  }
  return undefined;
}

// A length is {px: n} | {pct: n} | 'auto' | null.
function parseLength(value, fontSize) {
  if (value == null) return null;
  const v = String(value).trim().toLowerCase();
  if (v === '' ) return null;
  if (v === 'auto') return 'auto';
  let m = v.match(/^(-?[\d.]+)px$/);
  if (m) return { px: parseFloat(m[1]) };
  m = v.match(/^(-?[\d.]+)%$/);
  if (m) return { pct: parseFloat(m[1]) };
  m = v.match(/^(-?[\d.]+)(em|rem)$/);
  if (m) return { px: parseFloat(m[1]) * (fontSize || 16) };
  m = v.match(/^(-?[\d.]+)$/);
  if (m) return { px: parseFloat(m[1]) };
  return null;
}

function resolveLength(len, base, fallback = 0) {
  if (len == null || len === 'auto') return fallback;
  if (typeof len === 'object' && 'px' in len) return len.px;
  if (typeof len === 'object' && 'pct' in len) return base != null ? (len.pct / 100) * base : fallback;
  return fallback;
}

// --- stylesheet handling ----------------------------------------------------

// Parses simple rules out of <style> text: comma lists of compound simple
// selectors (tag, #id, .class and combinations). Anything with combinators
// is dropped.
function parseStylesheets(document) {
  const rules = [];
  const sheets = document.querySelectorAll('style');
  for (const sheet of sheets) {
    const text = sheet.textContent || '';
    const cleaned = text.replace(/\/\*[\s\S]*?\*\//g, '');
    const re = /([^{}]+)\{([^}]*)\}/g;
    let m;
    while ((m = re.exec(cleaned)) !== null) {
      const decls = parseDeclarations(m[2]);
      for (const rawSel of m[1].split(',')) {
        const sel = rawSel.trim();
        if (!sel || /[\s>+~[\]:]/.test(sel)) continue;
        const parsed = parseCompound(sel);
        if (parsed) rules.push({ ...parsed, decls, order: rules.length });
      }
    }
  }
  return rules;
}

function parseCompound(sel) {
  const m = sel.match(/^([a-zA-Z][\w-]*|\*)?((?:[#.][\w-]+)*)$/);
  if (!m) return null;
  const tag = m[1] && m[1] !== '*' ? m[1].toLowerCase() : null;
  const ids = [];
  const classes = [];
  const trailer = m[2] || '';
  const re = /([#.])([\w-]+)/g;
  let t;
  while ((t = re.exec(trailer)) !== null) {
    (t[1] === '#' ? ids : classes).push(t[2]);
  }
  const specificity = ids.length * 100 + classes.length * 10 + (tag ? 1 : 0);
  return { tag, ids, classes, specificity };
}

function parseDeclarations(text) {
  const decls = {};
  for (const part of text.split(';')) {
    const idx = part.indexOf(':');
    if (idx < 0) continue;
    const prop = part.slice(0, idx).trim().toLowerCase();
    const value = part.slice(idx + 1).trim();
    if (prop) decls[prop] = value;
  }
  return decls;
}

function ruleMatches(rule, el) {
  if (rule.tag && el.tagName.toLowerCase() !== rule.tag) return false;
  for (const id of rule.ids) if (el.id !== id) return false;
  for (const cls of rule.classes) if (!el.classList.contains(cls)) return false;
  return true;
}

// --- computed style ----------------------------------------------------------

function defaultStyleFor(el, inherited) {
  const tag = el.tagName.toLowerCase();
  const style = {
    display: BLOCK_TAGS.has(tag) ? 'block' : INLINE_BLOCK_TAGS.has(tag) ? 'inline-block' : 'inline',
    position: 'static',
    left: null, top: null, right: null, bottom: null,
    width: null, height: null,
    margin: [0, 0, 0, 0],
    padding: [0, 0, 0, 0],
    borderWidth: [0, 0, 0, 0],
    borderColor: [0, 0, 0],
    background: null,
    color: inherited.color,
    fontSize: inherited.fontSize,
    bold: inherited.bold,
    lineHeight: null,
    textAlign: inherited.textAlign,
    visibility: inherited.visibility,
    underline: false,
    boxSizing: 'content-box',
  };

  switch (tag) {
    case 'body':
      style.margin = [8, 8, 8, 8];
      break;
    case 'p':
      style.margin = [16, 0, 16, 0];
      break;
    case 'ul':
    case 'ol':
      style.margin = [16, 0, 16, 0];
      style.padding = [0, 0, 0, 40];
      break;
    case 'a':
      if (el.hasAttribute('href')) {
        style.color = [0, 0, 238];
        style.underline = true;
      }
      break;
    case 'b':
    case 'strong':
      style.bold = true;
      break;
    case 'hr':
      style.margin = [8, 0, 8, 0];
      style.height = { px: 2 };
      style.background = [160, 160, 160];
      break;
    case 'pre':
      style.margin = [13, 0, 13, 0];
      break;
    case 'button':
      style.fontSize = 13;
      style.padding = [3, 8, 3, 8];
      style.borderWidth = [1, 1, 1, 1];
      style.borderColor = [118, 118, 118];
      style.background = [239, 239, 239];
      style.textAlign = 'center';
      style.height = { px: 16 };
      break;
    case 'textarea': {
      style.fontSize = 13;
      style.padding = [2, 3, 2, 3];
      style.borderWidth = [1, 1, 1, 1];
      style.borderColor = [118, 118, 118];
      style.background = [255, 255, 255];
      const cols = parseInt(el.getAttribute('cols') || '20', 10) || 20;
      const rows = parseInt(el.getAttribute('rows') || '2', 10) || 2;
      style.width = { px: cols * font.advance(13) };
      style.height = { px: rows * Math.ceil(13 * 1.2) };
      break;
    }
    case 'select':
      style.fontSize = 13;
      style.padding = [2, 4, 2, 4];
      style.borderWidth = [1, 1, 1, 1];
      style.borderColor = [118, 118, 118];
      style.background = [239, 239, 239];
      style.width = { px: 120 };
      break;
    case 'img': {
      const w = parseInt(el.getAttribute('width') || '0', 10) || 0;
      const h = parseInt(el.getAttribute('height') || '0', 10) || 0;
      style.width = { px: w || h || 0 };
      style.height = { px: h || w || 0 };
      style.background = [221, 221, 221];
      break;
    }
    case 'input': {
      const type = (el.getAttribute('type') || 'text').toLowerCase();
      style.fontSize = 13;
      if (type === 'hidden') {
        style.display = 'none';
      } else if (type === 'checkbox' || type === 'radio') {
        style.width = { px: 11 };
        style.height = { px: 11 };
        style.borderWidth = [1, 1, 1, 1];
        style.borderColor = [118, 118, 118];
        style.background = [255, 255, 255];
        style.margin = [3, 3, 3, 3];
      } else if (type === 'range') {
        style.width = { px: 130 };
        style.height = { px: 20 };
      } else if (type === 'submit' || type === 'button' || type === 'reset' || type === 'image') {
        style.padding = [3, 8, 3, 8];
        style.borderWidth = [1, 1, 1, 1];
        style.borderColor = [118, 118, 118];
        style.background = [239, 239, 239];
        style.textAlign = 'center';
        style.height = { px: 16 };
      } else {
        style.width = { px: 154 };
        style.height = { px: 16 };
        style.padding = [2, 3, 2, 3];
        style.borderWidth = [1, 1, 1, 1];
        style.borderColor = [118, 118, 118];
        style.background = [255, 255, 255];
      }
      break;
    }
    default:
      break;
  }

  const heading = HEADING_STYLE[tag];
  if (heading) {
    style.fontSize = heading.fontSize;
    style.bold = heading.bold;
    style.margin = [heading.margin, 0, heading.margin, 0];
  }
  return style;
}

function applyDeclarations(style, decls) {
  const fs = style.fontSize;
  for (const [prop, raw] of Object.entries(decls)) {
    const value = raw.replace(/!important\s*$/i, '').trim();
    switch (prop) {
      case 'display': {
        const v = value.toLowerCase();
        if (['block', 'inline', 'inline-block', 'none', 'flex', 'grid'].includes(v)) {
          style.display = v === 'flex' || v === 'grid' ? 'block' : v;
        }
        break;
      }
      case 'position': {
        const v = value.toLowerCase();
        if (['static', 'relative', 'absolute', 'fixed', 'sticky'].includes(v)) {
          style.position = v === 'sticky' ? 'relative' : v;
        }
        break;
      }
      case 'left': style.left = parseLength(value, fs); break;
      case 'top': style.top = parseLength(value, fs); break;
      case 'right': style.right = parseLength(value, fs); break;
      case 'bottom': style.bottom = parseLength(value, fs); break;
      case 'width': style.width = parseLength(value, fs); break;
      case 'height': style.height = parseLength(value, fs); break;
      case 'margin': {
        const sides = parseBox(value, fs);
        if (sides) style.margin = sides;
        break;
      }
      case 'margin-top': style.margin[0] = resolveLength(parseLength(value, fs), null); break;
      case 'margin-right': style.margin[1] = resolveLength(parseLength(value, fs), null); break;
      case 'margin-bottom': style.margin[2] = resolveLength(parseLength(value, fs), null); break;
      case 'margin-left': style.margin[3] = resolveLength(parseLength(value, fs), null); break;
      case 'padding': {
        const sides = parseBox(value, fs);
        if (sides) style.padding = sides;
        break;
      }
      case 'padding-top': style.padding[0] = resolveLength(parseLength(value, fs), null); break;
      case 'padding-right': style.padding[1] = resolveLength(parseLength(value, fs), null); break;
      case 'padding-bottom': style.padding[2] = resolveLength(parseLength(value, fs), null); break;
      case 'padding-left': style.padding[3] = resolveLength(parseLength(value, fs), null); break;
      case 'border': {
        const parsed = parseBorder(value, fs);
        if (parsed) {
          style.borderWidth = [parsed.width, parsed.width, parsed.width, parsed.width];
          if (parsed.color !== undefined) style.borderColor = parsed.color || [0, 0, 0];
          if (parsed.none) style.borderWidth = [0, 0, 0, 0];
        }
        break;
      }
      case 'border-width': {
        const sides = parseBox(value, fs);
        if (sides) style.borderWidth = sides;
        break;
      }
      case 'border-color': {
        const c = parseColor(value);
        if (c !== undefined) style.borderColor = c || [0, 0, 0];
        break;
      }
      case 'background':
      case 'background-color': {
        const c = parseColor(value.split(/\s+/)[0]);
        if (c !== undefined) style.background = c;
        break;
      }
      case 'color': {
        const c = parseColor(value);
        if (c) style.color = c;
        break;
      }
      case 'font-size': {
        const len = parseLength(value, fs);
        if (len && typeof len === 'object' && 'px' in len) style.fontSize = Math.max(6, len.px);
        break;
      }
      case 'font-weight': {
        const v = value.toLowerCase();
        if (v === 'bold' || parseInt(v, 10) >= 600) style.bold = true;
        else if (v === 'normal' || parseInt(v, 10) < 600) style.bold = false;
        break;
      }
      case 'line-height': {
        const v = value.trim();
        if (/^[\d.]+$/.test(v)) style.lineHeight = Math.round(parseFloat(v) * style.fontSize);
        else {
          const len = parseLength(v, fs);
          if (len && typeof len === 'object' && 'px' in len) style.lineHeight = len.px;
        }
        break;
      }
      case 'text-align': {
        const v = value.toLowerCase();
        if (['left', 'center', 'right'].includes(v)) style.textAlign = v;
        break;
      }
      case 'text-decoration':
      case 'text-decoration-line':
        style.underline = /underline/.test(value);
        if (/none/.test(value)) style.underline = false;
        break;
      case 'visibility': {
        const v = value.toLowerCase();
        if (['visible', 'hidden'].includes(v)) style.visibility = v;
        break;
      }
      case 'box-sizing': {
        const v = value.toLowerCase();
        if (v === 'border-box' || v === 'content-box') style.boxSizing = v;
        break;
      }
      default:
        break;
    }
  }
}

function parseBox(value, fs) {
  const parts = value.trim().split(/\s+/).map((p) => resolveLength(parseLength(p, fs), null));
  if (parts.some((p) => p == null || Number.isNaN(p))) return null;
  if (parts.length === 1) return [parts[0], parts[0], parts[0], parts[0]];
  if (parts.length === 2) return [parts[0], parts[1], parts[0], parts[1]];
  if (parts.length === 3) return [parts[0], parts[1], parts[2], parts[1]];
  if (parts.length >= 4) return [parts[0], parts[1], parts[2], parts[3]];
  return null;
}

function parseBorder(value, fs) {
  const v = value.trim().toLowerCase();
  if (v === 'none' || v === '0') return { none: true, width: 0 };
  let width = 1;
  let color;
  for (const part of v.split(/\s+/)) {
    const len = parseLength(part, fs);
    if (len && typeof len === 'object' && 'px' in len) { width = len.px; continue; }
    if (['solid', 'dashed', 'dotted', 'double'].includes(part)) continue;
    const c = parseColor(part);
    if (c !== undefined) color = c;
  }
  return { width, color };
}

// --- the engine ---------------------------------------------------------------

class LayoutEngine {
  constructor(document, viewport) {
    this.document = document;
    this.viewport = viewport;
    this.rules = parseStylesheets(document);
    this.styles = new Map();  // element -> computed style
    this.boxes = new Map();   // element -> border box {x, y, w, h}
    this.fragments = [];      // text runs to paint
    this.pageWidth = viewport.width;
    this.pageHeight = viewport.height;
    this.absoluteBottoms = [];
    this.absoluteRights = [];
  }

  computeStyle(el, inherited) {
    const style = defaultStyleFor(el, inherited);
    const matching = this.rules
      .filter((rule) => ruleMatches(rule, el))
      .sort((a, b) => a.specificity - b.specificity || a.order - b.order);
    for (const rule of matching) applyDeclarations(style, rule.decls);
    const inline = el.getAttribute && el.getAttribute('style');
    if (inline) applyDeclarations(style, parseDeclarations(inline));
    this.styles.set(el, style);
    return style;
  }

  lineHeightOf(style) {
    return style.lineHeight != null ? Math.round(style.lineHeight) : Math.ceil(style.fontSize * 1.2);
  }

  run() {
    const root = this.document.documentElement;
    if (!root) return this;
    const inherited = {
      color: [0, 0, 0], fontSize: 16, bold: false,
      textAlign: 'left', visibility: 'visible',
    };
    const rootStyle = this.computeStyle(root, inherited);
    const bodyBottom = this.layoutBlock(root, rootStyle, {
      x: 0, y: 0, width: this.viewport.width,
    });
    this.pageHeight = Math.max(
      this.viewport.height,
      Math.ceil(bodyBottom),
      ...this.absoluteBottoms.map(Math.ceil),
    );
    this.pageWidth = Math.max(this.viewport.width, ...this.absoluteRights.map(Math.ceil));
    // Clamp page width to the viewport: the engine does not do horizontal
    // overflow, matching how the mirror renders at the client's width.
    this.pageWidth = this.viewport.width;
    return this;
  }

  inheritedFrom(style) {
    return {
      color: style.color,
      fontSize: style.fontSize,
      bold: style.bold,
      textAlign: style.textAlign,
      visibility: style.visibility,
    };
  }

  // Lays out one block-level element. cb: containing block content area
  // {x, y, width}. Returns the outer bottom edge (margin edge not included).
  layoutBlock(el, style, cb) {
    const [mt, mr, mb, ml] = style.margin;
    const [bt, br, bb, bl] = style.borderWidth;
    const [pt, pr, pb, pl] = style.padding;

    let contentWidth;
    if (style.width != null && style.width !== 'auto') {
      contentWidth = resolveLength(style.width, cb.width);
      if (style.boxSizing === 'border-box') contentWidth -= pl + pr + bl + br;
    } else {
      contentWidth = cb.width - ml - mr - pl - pr - bl - br;
    }
    contentWidth = Math.max(0, contentWidth);

    const x = cb.x + ml;
    const y = cb.y;
    const contentX = x + bl + pl;
    const contentY = y + bt + pt;

    // Registered before children lay out: absolutely positioned descendants
    // need their containing block's origin, which is already final here.
    const box = {
      x, y,
      w: contentWidth + pl + pr + bl + br,
      h: 0,
      contentX, contentY, contentWidth, contentHeight: 0,
    };
    this.boxes.set(el, box);

    const innerBottom = this.layoutChildren(el, style, {
      x: contentX, y: contentY, width: contentWidth,
    });

    let contentHeight;
    if (style.height != null && style.height !== 'auto') {
      contentHeight = resolveLength(style.height, cb.height != null ? cb.height : null, innerBottom - contentY);
      if (style.boxSizing === 'border-box') contentHeight -= pt + pb + bt + bb;
    } else {
      contentHeight = innerBottom - contentY;
    }
    contentHeight = Math.max(0, contentHeight);
    box.contentHeight = contentHeight;
    box.h = contentHeight + pt + pb + bt + bb;

    if (style.position === 'relative') {
      const dx = resolveLength(style.left, cb.width);
      const dy = resolveLength(style.top, null);
      box.x += dx;
      box.y += dy;
      box.contentX += dx;
      box.contentY += dy;
      this.shiftDescendants(el, dx, dy);
    }
    return box.y + box.h;
  }

  shiftDescendants(el, dx, dy) {
    if (dx === 0 && dy === 0) return;
    for (const child of el.querySelectorAll('*')) {
      const b = this.boxes.get(child);
      if (b) { b.x += dx; b.y += dy; b.contentX += dx; b.contentY += dy; }
    }
    for (const frag of this.fragments) {
      if (frag.owner && el.contains(frag.owner)) { frag.x += dx; frag.y += dy; }
    }
  }

  // Inline elements (spans, anchors) have no box of their own; their hit and
  // click target is the union of the text fragments they contain.
  growInlineAncestors(el, rect) {
    let cur = el;
    while (cur && cur.nodeType === 1) {
      const style = this.styles.get(cur);
      if (!style || style.display !== 'inline') break;
      const box = this.boxes.get(cur);
      if (!box) {
        this.boxes.set(cur, { x: rect.x, y: rect.y, w: rect.w, h: rect.h, inline: true });
      } else {
        const x2 = Math.max(box.x + box.w, rect.x + rect.w);
        const y2 = Math.max(box.y + box.h, rect.y + rect.h);
        box.x = Math.min(box.x, rect.x);
        box.y = Math.min(box.y, rect.y);
        box.w = x2 - box.x;
        box.h = y2 - box.y;
      }
      cur = cur.parentElement;
    }
  }

  // Flows the children of el inside the given content area; returns bottom.
  layoutChildren(el, parentStyle, area) {
    let cursorY = area.y;
    let inlineRun = [];
    const inherited = this.inheritedFrom(parentStyle);

    const flushInline = () => {
      if (inlineRun.length === 0) return;
      cursorY = this.layoutInlineRun(inlineRun, area, cursorY, parentStyle);
      inlineRun = [];
    };

    for (const node of Array.from(el.childNodes)) {
      if (node.nodeType === 3) { // text
        if ((node.textContent || '').trim().length > 0 || inlineRun.length > 0) {
          inlineRun.push({ type: 'text', node, style: this.styles.get(el) || parentStyle });
        }
        continue;
      }
      if (node.nodeType !== 1) continue;
      const tag = node.tagName.toLowerCase();
      if (SKIP_TAGS.has(tag)) continue;
      if (tag === 'br') {
        inlineRun.push({ type: 'break', node });
        continue;
      }
      const style = this.computeStyle(node, inherited);
      if (style.display === 'none') continue;

      if (style.position === 'absolute' || style.position === 'fixed') {
        this.layoutAbsolute(node, style, el);
        continue;
      }
      if (style.display === 'block') {
        flushInline();
        cursorY += style.margin[0];
        const bottom = this.layoutBlock(node, style, { x: area.x, y: cursorY, width: area.width });
        cursorY = bottom + style.margin[2];
      } else {
        inlineRun.push({ type: 'element', node, style });
      }
    }
    flushInline();
    return cursorY;
  }

  // Words and inline-block boxes flow left to right with wrapping.
  layoutInlineRun(items, area, startY, blockStyle) {
    const tokens = [];
    for (const item of items) {
      if (item.type === 'break') {
        tokens.push({ kind: 'break' });
      } else if (item.type === 'text') {
        const textStyle = item.style;
        const words = (item.node.textContent || '').split(/\s+/).filter((w) => w.length > 0);
        for (const word of words) {
          tokens.push({
            kind: 'word', word,
            width: font.measure(word, textStyle.fontSize),
            style: textStyle, owner: item.node.parentElement,
          });
        }
      } else {
        tokens.push({ kind: 'box', node: item.node, style: item.style });
      }
    }

    const spaceW = (style) => font.advance(style.fontSize);
    let lineTokens = [];
    let lineWidth = 0;
    let cursorY = startY;

    const flushLine = () => {
      if (lineTokens.length === 0) return;
      let lineHeight = 0;
      let placedWidth = 0;
      lineTokens.forEach((token, i) => {
        if (token.kind === 'word') {
          lineHeight = Math.max(lineHeight, this.lineHeightOf(token.style));
          placedWidth += token.width + (i < lineTokens.length - 1 ? token.trailingSpace : 0);
        } else {
          lineHeight = Math.max(lineHeight, token.box.h + token.style.margin[0] + token.style.margin[2]);
          placedWidth += token.style.margin[3] + token.box.w + token.style.margin[1];
        }
      });
      let x = area.x;
      if (blockStyle.textAlign === 'center') x += Math.max(0, (area.width - placedWidth) / 2);
      else if (blockStyle.textAlign === 'right') x += Math.max(0, area.width - placedWidth);
      for (const token of lineTokens) {
        if (token.kind === 'word') {
          const lh = this.lineHeightOf(token.style);
          const gh = font.glyphHeight(token.style.fontSize);
          const frag = {
            x: Math.round(x),
            y: Math.round(cursorY + (lineHeight - lh) + Math.max(0, Math.floor((lh - gh) / 2))),
            w: token.width,
            h: gh,
            text: token.word,
            fontSize: token.style.fontSize,
            color: token.style.color,
            bold: token.style.bold,
            underline: token.style.underline,
            visible: token.style.visibility !== 'hidden',
            owner: token.owner,
          };
          this.fragments.push(frag);
          this.growInlineAncestors(token.owner, frag);
          x += token.width + token.trailingSpace;
        } else {
          const dx = x + token.style.margin[3] - token.box.x;
          const dy = cursorY + token.style.margin[0] + Math.max(0, lineHeight - token.box.h - token.style.margin[0] - token.style.margin[2]) - token.box.y;
          token.box.x += dx; token.box.y += dy;
          token.box.contentX += dx; token.box.contentY += dy;
          this.shiftDescendants(token.node, dx, dy);
          const frag = { x: token.box.x, y: token.box.y, w: token.box.w, h: token.box.h };
          this.growInlineAncestors(token.node.parentElement, frag);
          x += token.style.margin[3] + token.box.w + token.style.margin[1] + 0;
        }
      }
      cursorY += lineHeight;
      lineTokens = [];
      lineWidth = 0;
    };

    for (const token of tokens) {
      if (token.kind === 'break') {
        if (lineTokens.length === 0) cursorY += this.lineHeightOf(blockStyle);
        else flushLine();
        continue;
      }
      let fitWidth;
      let advanceWidth;
      if (token.kind === 'word') {
        token.trailingSpace = spaceW(token.style);
        fitWidth = token.width;
        advanceWidth = token.width + token.trailingSpace;
      } else {
        token.box = this.layoutInlineBlock(token.node, token.style, area);
        fitWidth = token.style.margin[3] + token.box.w + token.style.margin[1];
        advanceWidth = fitWidth;
      }
      if (lineWidth + fitWidth > area.width && lineTokens.length > 0) flushLine();
      lineTokens.push(token);
      lineWidth += advanceWidth;
    }
    flushLine();
    return cursorY;
  }

  // Lays out an inline-block (or plain inline treated as a box when it has
  // explicit sizing, e.g. styled links). Position is fixed up by the caller.
  layoutInlineBlock(node, style, area) {
    let width = style.width;
    if (width == null || width === 'auto') {
      width = { px: Math.min(this.intrinsicContentWidth(node, style), area.width) };
    }
    const probeStyle = { ...style, width, margin: [0, 0, 0, 0], position: 'static' };
    this.layoutBlock(node, probeStyle, { x: 0, y: 0, width: area.width });
    this.styles.set(node, style);
    return this.boxes.get(node);
  }

  // Shrink-to-fit content width for boxes without an explicit width.
  intrinsicContentWidth(node, style) {
    const tag = node.tagName.toLowerCase();
    if (tag === 'input') {
      const label = inputLabel(node);
      return Math.max(font.measure(label, style.fontSize), font.advance(style.fontSize) * 2);
    }
    return Math.max(font.advance(style.fontSize), this.measureIntrinsicWidth(node, style));
  }

  measureIntrinsicWidth(node, style) {
    let total = 0;
    for (const child of Array.from(node.childNodes)) {
      if (child.nodeType === 3) {
        const words = (child.textContent || '').split(/\s+/).filter((w) => w.length > 0);
        total += font.measure(words.join(' '), style.fontSize);
      } else if (child.nodeType === 1 && !SKIP_TAGS.has(child.tagName.toLowerCase())) {
        const childStyle = this.styles.get(child) || this.computeStyle(child, this.inheritedFrom(style));
        if (childStyle.width && typeof childStyle.width === 'object' && 'px' in childStyle.width) {
          total += childStyle.width.px;
        } else {
          total += this.measureIntrinsicWidth(child, childStyle);
        }
      }
    }
    return total;
  }

  layoutAbsolute(el, style, parent) {
    // Containing block: nearest positioned ancestor's padding box, else the
    // initial containing block (the viewport-wide page).
    let anchor = parent;
    let cbBox = null;
    while (anchor) {
      const s = this.styles.get(anchor);
      if (s && (s.position === 'relative' || s.position === 'absolute' || s.position === 'fixed')) {
        cbBox = this.boxes.get(anchor);
        break;
      }
      anchor = anchor.parentElement;
    }
    const cb = cbBox
      ? { x: cbBox.x, y: cbBox.y, width: cbBox.w, height: cbBox.h }
      : { x: 0, y: 0, width: this.viewport.width, height: null };

    let x = cb.x + resolveLength(style.left, cb.width);
    const y = cb.y + resolveLength(style.top, cb.height);
    let width = style.width;
    if (width == null || width === 'auto') {
      width = { px: Math.min(this.intrinsicContentWidth(el, style), Math.max(0, cb.width - (x - cb.x))) };
    }
    const noMargin = { ...style, width, margin: [0, 0, 0, 0], position: 'static' };
    if (style.left == null && style.right != null && style.width != null) {
      const w = resolveLength(style.width, cb.width);
      x = cb.x + cb.width - resolveLength(style.right, cb.width) - w
        - style.padding[1] - style.padding[3] - style.borderWidth[1] - style.borderWidth[3];
    }
    this.layoutBlock(el, noMargin, { x, y, width: cb.width - (x - cb.x), height: cb.height });
    this.styles.set(el, style);
    const box = this.boxes.get(el);
    this.absoluteBottoms.push(box.y + box.h);
    this.absoluteRights.push(box.x + box.w);
    return box;
  }
}

function inputLabel(el) {
  const tag = el.tagName.toLowerCase();
  if (tag === 'button') return (el.textContent || '').trim() || 'button';
  const type = (el.getAttribute('type') || 'text').toLowerCase();
  if (type === 'submit') return el.getAttribute('value') || 'Submit';
  if (type === 'reset') return el.getAttribute('value') || 'Reset';
  if (type === 'button' || type === 'image') return el.getAttribute('value') || '';
  return el.value != null ? String(el.value) : '';
}

function layoutDocument(document, viewport) {
  return new LayoutEngine(document, viewport).run();
}

module.exports = { layoutDocument, parseColor, inputLabel };
