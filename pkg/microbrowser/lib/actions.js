'use strict';

// Synthetic input: W3C action sequences decoded into DOM events plus the
// default activation behaviour jsdom leaves unimplemented (link navigation,
// form submission, checkbox toggling, range dragging, typing).

const { URL } = require('url');

// W3C normalized key codepoints (the private-use encodings drivers send).
const KEY_CODES = {
  '': 'Backspace',
  '': 'Tab',
  '': 'Clear',
  '': 'Enter',
  '': 'Enter',
  '': 'Shift',
  '': 'Control',
  '': 'Alt',
  '': 'Escape',
  '': ' ',
  '': 'PageUp',
  '': 'PageDown',
  '': 'End',
  '': 'Home',
  '': 'ArrowLeft',
  '': 'ArrowUp',
  '': 'ArrowRight',
  '': 'ArrowDown',
  '': 'Insert',
  '': 'Delete',
};

function normalizeKey(value) {
  return KEY_CODES[value] || value;
}

function sleep(ms) {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function isTextEntry(el) {
  if (!el) return false;
  const tag = el.tagName ? el.tagName.toLowerCase() : '';
  if (tag === 'textarea') return true;
  if (tag !== 'input') return false;
  const type = (el.getAttribute('type') || 'text').toLowerCase();
  return ['text', 'password', 'email', 'search', 'url', 'tel', 'number'].includes(type);
}

function isFocusable(el) {
  if (!el || !el.tagName) return false;
  const tag = el.tagName.toLowerCase();
  if (['input', 'textarea', 'button', 'select'].includes(tag)) return !el.disabled;
  if (tag === 'a' && el.hasAttribute('href')) return true;
  return el.hasAttribute('tabindex');
}

class InputDriver {
  constructor(session) {
    this.session = session;
    this.pointer = { x: 0, y: 0, down: false, dragTarget: null };
  }

  get window() {
    return this.session.window;
  }

  dispatchMouse(target, type, x, y, options = {}) {
    const win = this.window;
    const event = new win.MouseEvent(type, {
      bubbles: true,
      cancelable: type !== 'mousemove',
      view: win,
      clientX: Math.round(x - this.session.scrollX),
      clientY: Math.round(y - this.session.scrollY),
      pageX: Math.round(x),
      pageY: Math.round(y),
      button: options.button || 0,
      detail: options.detail != null ? options.detail : 1,
    });
    const ok = target.dispatchEvent(event);
    return { event, notPrevented: ok };
  }

  // Full click semantics at document coordinates.
  async clickAt(x, y, button = 0) {
    const session = this.session;
    const target = session.hitTest(x, y) || this.window.document.body;
    if (!target) return;

    this.dispatchMouse(target, 'pointerdown', x, y, { button });
    this.dispatchMouse(target, 'mousedown', x, y, { button });
    this.applyFocus(target);
    this.dispatchMouse(target, 'pointerup', x, y, { button });
    this.dispatchMouse(target, 'mouseup', x, y, { button });
    const { notPrevented } = this.dispatchMouse(target, 'click', x, y, { button });
    session.markDirty();
    if (notPrevented && button === 0) {
      await this.activate(target, x);
    }
  }

  applyFocus(target) {
    let el = target;
    while (el && !isFocusable(el)) el = el.parentElement;
    const doc = this.window.document;
    if (el) {
      el.focus();
    } else if (doc.activeElement && doc.activeElement !== doc.body && doc.activeElement.blur) {
      doc.activeElement.blur();
    }
  }

  // Default activation behaviour after an unprevented click.
  async activate(target, pointerX) {
    const session = this.session;
    let el = target;
    while (el) {
      const tag = el.tagName ? el.tagName.toLowerCase() : '';
      if (tag === 'a' && el.hasAttribute('href')) {
        const href = el.getAttribute('href');
        if (href && !href.startsWith('#') && !href.toLowerCase().startsWith('javascript:')) {
          try {
            await session.navigate(new URL(href, session.currentUrl).href);
          } catch (e) {
            // unreachable target: stay on the page, like an error page would
            session.consoleEntries.push({ level: 'error', text: `navigation failed: ${e.message}` });
          }
        }
        return;
      }
      if (tag === 'input') {
        const type = (el.getAttribute('type') || 'text').toLowerCase();
        if (type === 'checkbox') {
          el.checked = !el.checked;
          this.fireInput(el);
          this.fireChange(el);
          return;
        }
        if (type === 'radio') {
          el.checked = true;
          this.fireInput(el);
          this.fireChange(el);
          return;
        }
        if (type === 'range') {
          this.setRangeFromPointer(el, pointerX);
          return;
        }
        if ((type === 'submit' || type === 'image') && el.form) {
          await session.submitForm(el.form, el);
          return;
        }
        if (type === 'reset' && el.form) {
          el.form.reset();
          return;
        }
      }
      if (tag === 'button') {
        const type = (el.getAttribute('type') || 'submit').toLowerCase();
        if (type === 'submit' && el.form) {
          await session.submitForm(el.form, el);
          return;
        }
        return;
      }
      el = el.parentElement;
    }
  }

  setRangeFromPointer(el, pointerX) {
    const layout = this.session.ensureLayout();
    const box = layout.boxes.get(el);
    if (!box || box.w <= 0) return;
    const min = parseFloat(el.getAttribute('min') || '0');
    const max = parseFloat(el.getAttribute('max') || '100');
    const step = parseFloat(el.getAttribute('step') || '1') || 1;
    const frac = Math.max(0, Math.min(1, (pointerX - box.x) / box.w));
    let value = min + frac * (max - min);
    value = Math.round((value - min) / step) * step + min;
    value = Math.max(min, Math.min(max, value));
    const text = Number.isInteger(value) ? String(value) : String(+value.toFixed(4));
    if (el.value !== text) {
      el.value = text;
      this.fireInput(el);
    }
  }

  fireInput(el, data) {
    const win = this.window;
    const event = new win.InputEvent('input', { bubbles: true, data: data != null ? data : null });
    el.dispatchEvent(event);
    this.session.markDirty();
  }

  fireChange(el) {
    const event = new this.window.Event('change', { bubbles: true });
    el.dispatchEvent(event);
  }

  dispatchKey(type, key) {
    const win = this.window;
    const doc = win.document;
    const target = doc.activeElement || doc.body || doc.documentElement;
    const event = new win.KeyboardEvent(type, {
      bubbles: true,
      cancelable: true,
      key,
      view: win,
    });
    const ok = target.dispatchEvent(event);
    return { target, notPrevented: ok };
  }

  async pressKey(key) {
    const { target, notPrevented } = this.dispatchKey('keydown', key);
    if (!notPrevented) {
      this.dispatchKey('keyup', key);
      return;
    }
    if (key.length === 1) {
      this.dispatchKey('keypress', key);
      if (isTextEntry(target)) {
        target.value = String(target.value || '') + key;
        this.fireInput(target, key);
      }
    } else if (key === 'Backspace') {
      if (isTextEntry(target)) {
        const old = String(target.value || '');
        if (old.length > 0) {
          target.value = old.slice(0, -1);
          this.fireInput(target);
        }
      }
    } else if (key === 'Enter') {
      if (target.tagName && target.tagName.toLowerCase() === 'textarea') {
        target.value = String(target.value || '') + '\n';
        this.fireInput(target, '\n');
      } else if (isTextEntry(target) && target.form) {
        await this.implicitSubmit(target.form);
      } else if (target.tagName && ['button', 'a'].includes(target.tagName.toLowerCase())) {
        const layout = this.session.ensureLayout();
        const box = layout.boxes.get(target);
        if (box) await this.clickAt(box.x + box.w / 2, box.y + box.h / 2);
      }
    }
    this.dispatchKey('keyup', key);
  }

  async implicitSubmit(form) {
    const submitter = Array.from(form.elements).find((el) => {
      const tag = el.tagName.toLowerCase();
      const type = (el.getAttribute('type') || (tag === 'button' ? 'submit' : 'text')).toLowerCase();
      return (tag === 'input' || tag === 'button') && type === 'submit';
    });
    if (submitter) {
      const layout = this.session.ensureLayout();
      const box = layout.boxes.get(submitter);
      if (box) {
        await this.clickAt(box.x + box.w / 2, box.y + box.h / 2);
        return;
      }
    }
    await this.session.submitForm(form, submitter || null);
  }

  async pointerMoveTo(x, y) {
    this.pointer.x = x;
    this.pointer.y = y;
    const target = this.session.hitTest(x, y);
    if (target) this.dispatchMouse(target, 'mousemove', x, y);
    if (this.pointer.down && this.pointer.dragTarget) {
      const el = this.pointer.dragTarget;
      const tag = el.tagName ? el.tagName.toLowerCase() : '';
      if (tag === 'input' && (el.getAttribute('type') || '').toLowerCase() === 'range') {
        this.setRangeFromPointer(el, x);
      }
    }
  }

  // One W3C action sequence. Sources run sequentially, which matches how the
  // mirror's driver encodes its gestures (one source per request).
  async perform(sources) {
    for (const source of sources || []) {
      if (source.type === 'key') {
        for (const action of source.actions || []) {
          if (action.type === 'keyDown') {
            await this.pressKey(normalizeKey(action.value));
          } else if (action.type === 'pause' && action.duration) {
            await sleep(action.duration);
          }
          // keyUp is folded into pressKey
        }
      } else if (source.type === 'pointer') {
        for (const action of source.actions || []) {
          if (action.type === 'pause') {
            if (action.duration) await sleep(action.duration);
            continue;
          }
          if (action.type === 'pointerMove') {
            let x = action.x || 0;
            let y = action.y || 0;
            if (action.origin === 'pointer') {
              x += this.pointer.x;
              y += this.pointer.y;
            } else if (action.origin && typeof action.origin === 'object') {
              const el = this.session.resolveElementRef(action.origin);
              const layout = this.session.ensureLayout();
              const box = el && layout.boxes.get(el);
              if (box) {
                x += box.x + box.w / 2;
                y += box.y + box.h / 2;
              }
            } else {
              // viewport origin: translate to document coordinates
              x += this.session.scrollX;
              y += this.session.scrollY;
            }
            if (action.duration) await sleep(Math.min(action.duration, 100));
            await this.pointerMoveTo(x, y);
          } else if (action.type === 'pointerDown') {
            this.pointer.down = true;
            const target = this.session.hitTest(this.pointer.x, this.pointer.y);
            this.pointer.dragTarget = target;
            this.pointer.moved = false;
            if (target) {
              this.dispatchMouse(target, 'pointerdown', this.pointer.x, this.pointer.y, { button: action.button || 0 });
              this.dispatchMouse(target, 'mousedown', this.pointer.x, this.pointer.y, { button: action.button || 0 });
              this.applyFocus(target);
              this.pointer.downX = this.pointer.x;
              this.pointer.downY = this.pointer.y;
            }
          } else if (action.type === 'pointerUp') {
            const wasDown = this.pointer.down;
            this.pointer.down = false;
            const target = this.session.hitTest(this.pointer.x, this.pointer.y) || this.window.document.body;
            if (wasDown && target) {
              this.dispatchMouse(target, 'pointerup', this.pointer.x, this.pointer.y, { button: action.button || 0 });
              this.dispatchMouse(target, 'mouseup', this.pointer.x, this.pointer.y, { button: action.button || 0 });
              const moved = Math.abs(this.pointer.x - (this.pointer.downX || 0)) > 2
                || Math.abs(this.pointer.y - (this.pointer.downY || 0)) > 2;
              const dragTarget = this.pointer.dragTarget;
              const dragTag = dragTarget && dragTarget.tagName ? dragTarget.tagName.toLowerCase() : '';
              const isRange = dragTag === 'input'
                && (dragTarget.getAttribute('type') || '').toLowerCase() === 'range';
              if (isRange) {
                this.setRangeFromPointer(dragTarget, this.pointer.x);
                this.fireChange(dragTarget);
                this.session.markDirty();
              } else if (!moved || dragTarget === target) {
                const { notPrevented } = this.dispatchMouse(target, 'click', this.pointer.x, this.pointer.y, { button: action.button || 0 });
                this.session.markDirty();
                if (notPrevented && (action.button || 0) === 0) {
                  await this.activate(target, this.pointer.x);
                }
              }
            }
            this.pointer.dragTarget = null;
          }
        }
      }
    }
  }
}

module.exports = { InputDriver, normalizeKey, isTextEntry };
