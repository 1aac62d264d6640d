'use strict';

// jsdom has no layout; these patches graft the engine's computed geometry
// onto the standard DOM APIs so page scripts (and injected automation
// scripts) see a normal browser surface.

function domRect(x, y, w, h) {
  return {
    x, y, width: w, height: h,
    left: x, top: y, right: x + w, bottom: y + h,
    toJSON() { return { x, y, width: w, height: h }; },
  };
}

function patchWindow(window, session) {
  const { Element, HTMLElement } = window;

  const boxOf = (el) => {
    const layout = session.ensureLayout();
    return layout.boxes.get(el) || null;
  };
  const styleOf = (el) => {
    const layout = session.ensureLayout();
    return layout.styles.get(el) || null;
  };

  Element.prototype.getBoundingClientRect = function getBoundingClientRect() {
    const box = boxOf(this);
    if (!box) return domRect(0, 0, 0, 0);
    return domRect(box.x - session.scrollX, box.y - session.scrollY, box.w, box.h);
  };
  Element.prototype.getClientRects = function getClientRects() {
    return [this.getBoundingClientRect()];
  };

  const defineBoxGetter = (name, fn) => {
    Object.defineProperty(HTMLElement.prototype, name, {
      configurable: true,
      get() { return fn(this); },
    });
  };
  defineBoxGetter('offsetWidth', (el) => { const b = boxOf(el); return b ? Math.round(b.w) : 0; });
  defineBoxGetter('offsetHeight', (el) => { const b = boxOf(el); return b ? Math.round(b.h) : 0; });
  defineBoxGetter('offsetLeft', (el) => { const b = boxOf(el); return b ? Math.round(b.x) : 0; });
  defineBoxGetter('offsetTop', (el) => { const b = boxOf(el); return b ? Math.round(b.y) : 0; });
  Object.defineProperty(HTMLElement.prototype, 'offsetParent', {
    configurable: true,
    get() {
      const style = styleOf(this);
      if (!style || style.display === 'none') return null;
      return this.parentElement ? this.ownerDocument.body : null;
    },
  });

  const defineScrollGetter = (name, fn) => {
    Object.defineProperty(Element.prototype, name, { configurable: true, get() { return fn(this); } });
  };
  defineScrollGetter('scrollWidth', (el) => {
    const layout = session.ensureLayout();
    if (el === el.ownerDocument.documentElement || el === el.ownerDocument.body) return layout.pageWidth;
    const b = layout.boxes.get(el);
    return b ? Math.round(b.w) : 0;
  });
  defineScrollGetter('scrollHeight', (el) => {
    const layout = session.ensureLayout();
    if (el === el.ownerDocument.documentElement || el === el.ownerDocument.body) return layout.pageHeight;
    const b = layout.boxes.get(el);
    return b ? Math.round(b.h) : 0;
  });
  defineScrollGetter('clientWidth', (el) => {
    if (el === el.ownerDocument.documentElement) return session.viewport.width;
    const b = boxOf(el);
    return b ? Math.round(b.w) : 0;
  });
  defineScrollGetter('clientHeight', (el) => {
    if (el === el.ownerDocument.documentElement) return session.viewport.height;
    const b = boxOf(el);
    return b ? Math.round(b.h) : 0;
  });

  const defWin = (name, getter) => {
    Object.defineProperty(window, name, { configurable: true, get: getter });
  };
  defWin('scrollX', () => session.scrollX);
  defWin('scrollY', () => session.scrollY);
  defWin('pageXOffset', () => session.scrollX);
  defWin('pageYOffset', () => session.scrollY);
  defWin('innerWidth', () => session.viewport.width);
  defWin('innerHeight', () => session.viewport.height);

  window.scrollTo = function scrollTo(x, y) {
    if (typeof x === 'object' && x !== null) ({ left: x = session.scrollX, top: y = session.scrollY } = x);
    session.setScroll(x, y);
  };
  window.scroll = window.scrollTo;
  window.scrollBy = function scrollBy(dx, dy) {
    if (typeof dx === 'object' && dx !== null) ({ left: dx = 0, top: dy = 0 } = dx);
    session.setScroll(session.scrollX + (dx || 0), session.scrollY + (dy || 0));
  };
  Element.prototype.scrollIntoView = function scrollIntoView() {
    const box = boxOf(this);
    if (box) session.setScroll(session.scrollX, box.y);
  };

  // Resolved-style object backed by the layout engine's cascade; only the
  // subset of properties the engine understands is meaningful.
  window.getComputedStyle = function getComputedStyle(el) {
    const style = styleOf(el);
    const px = (n) => `${Math.round(n)}px`;
    const color = (c) => (c ? `rgb(${c[0]}, ${c[1]}, ${c[2]})` : 'rgba(0, 0, 0, 0)');
    const resolved = {
      display: style ? style.display : 'none',
      visibility: style ? style.visibility : 'visible',
      position: style ? style.position : 'static',
      'font-size': style ? px(style.fontSize) : '16px',
      'font-weight': style && style.bold ? '700' : '400',
      color: style ? color(style.color) : 'rgb(0, 0, 0)',
      'background-color': style ? color(style.background) : 'rgba(0, 0, 0, 0)',
      'text-align': style ? style.textAlign : 'left',
    };
    const obj = {
      getPropertyValue(name) { return resolved[name] != null ? resolved[name] : ''; },
    };
    obj.display = resolved.display;
    obj.visibility = resolved.visibility;
    obj.position = resolved.position;
    obj.fontSize = resolved['font-size'];
    obj.fontWeight = resolved['font-weight'];
    obj.color = resolved.color;
    obj.backgroundColor = resolved['background-color'];
    obj.textAlign = resolved['text-align'];
    return obj;
  };

  window.document.elementFromPoint = function elementFromPoint(x, y) {
    return session.hitTest(x + session.scrollX, y + session.scrollY);
  };

  // Value assignment from page scripts must invalidate the raster; property
  // writes are invisible to MutationObserver.
  for (const ctor of [window.HTMLInputElement, window.HTMLTextAreaElement, window.HTMLSelectElement]) {
    const proto = ctor.prototype;
    const desc = Object.getOwnPropertyDescriptor(proto, 'value');
    if (desc && desc.set) {
      Object.defineProperty(proto, 'value', {
        configurable: true,
        get: desc.get,
        set(v) { desc.set.call(this, v); session.markDirty(); },
      });
    }
  }
  const checkedDesc = Object.getOwnPropertyDescriptor(window.HTMLInputElement.prototype, 'checked');
  if (checkedDesc && checkedDesc.set) {
    Object.defineProperty(window.HTMLInputElement.prototype, 'checked', {
      configurable: true,
      get: checkedDesc.get,
      set(v) { checkedDesc.set.call(this, v); session.markDirty(); },
    });
  }

  window.alert = () => {};
  window.confirm = () => true;
  window.prompt = () => null;
}

module.exports = { patchWindow };
