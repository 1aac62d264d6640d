'use strict';

// One browsing session: a jsdom window plus the engine state a real browser
// would keep around it (history, scroll, layout, raster cache, element
// registry for the wire protocol).

const vm = require('vm');
const crypto = require('crypto');
const { URL } = require('url');
const { JSDOM, VirtualConsole, ResourceLoader } = require('jsdom');

const { fetchUrl } = require('./fetch');
const { layoutDocument } = require('./layout');
const { render, cropViewport } = require('./raster');
const { patchWindow } = require('./dompatch');
const { InputDriver } = require('./actions');

const ELEMENT_KEY = 'element-6066-11e4-a52e-4f735466cecf';

class WebDriverError extends Error {
  constructor(code, message, status) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

const err = {
  noSuchElement: (msg) => new WebDriverError('no such element', msg, 404),
  stale: (msg) => new WebDriverError('stale element reference', msg, 404),
  invalidSession: () => new WebDriverError('invalid session id', 'session is gone', 404),
  unknownCommand: (msg) => new WebDriverError('unknown command', msg, 404),
  jsError: (msg) => new WebDriverError('javascript error', msg, 500),
  unknown: (msg) => new WebDriverError('unknown error', msg, 500),
  invalidArgument: (msg) => new WebDriverError('invalid argument', msg, 400),
};

// Subresource fetching with the session's block list applied; a blocked URL
// is simply never requested, like a content-blocker extension would do.
class BlockingResourceLoader extends ResourceLoader {
  constructor(session) {
    super();
    this.session = session;
  }

  fetch(url, options) {
    if (this.session.isBlocked(url)) {
      this.session.consoleEntries.push({ level: 'info', text: `blocked resource ${url}` });
      return null;
    }
    return super.fetch(url, options);
  }
}

function htmlEscape(s) {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

class Session {
  constructor(id, capabilities = {}) {
    this.id = id;
    const vp = capabilities['mb:viewport'] || {};
    this.viewport = {
      width: Math.max(1, vp.width || 1024),
      height: Math.max(1, vp.height || 768),
    };
    this.blockList = (capabilities['mb:blockList'] || []).map(String);
    this.dom = null;
    this.scrollX = 0;
    this.scrollY = 0;
    this.history = [];
    this.historyIndex = -1;
    this.elements = new Map();
    this.elementIds = new WeakMap();
    this.consoleEntries = [];
    this.input = new InputDriver(this);
    this._layout = null;
    this._layoutDirty = true;
    this._png = null;
    this._mutationObserver = null;
    this._chain = Promise.resolve();
    this.closed = false;
  }

  // Serializes all commands touching this session.
  enqueue(task) {
    const run = this._chain.then(() => {
      if (this.closed) throw err.invalidSession();
      return task();
    });
    this._chain = run.then(() => undefined, () => undefined);
    return run;
  }

  get window() {
    if (!this.dom) throw err.unknown('no page loaded');
    return this.dom.window;
  }

  get currentUrl() {
    return this.dom ? this.dom.window.location.href : 'about:blank';
  }

  get title() {
    return this.dom ? this.dom.window.document.title : '';
  }

  isBlocked(url) {
    return this.blockList.some((pattern) => url.includes(pattern));
  }

  markDirty() {
    this._layoutDirty = true;
    this._png = null;
  }

  setScroll(x, y) {
    const layout = this.ensureLayout();
    const maxX = Math.max(0, layout.pageWidth - this.viewport.width);
    const maxY = Math.max(0, layout.pageHeight - this.viewport.height);
    this.scrollX = Math.max(0, Math.min(Math.round(x || 0), maxX));
    this.scrollY = Math.max(0, Math.min(Math.round(y || 0), maxY));
  }

  setViewport(width, height) {
    this.viewport = { width: Math.max(1, width), height: Math.max(1, height) };
    this.markDirty();
  }

  ensureLayout() {
    if (!this.dom) throw err.unknown('no page loaded');
    if (this._layoutDirty || !this._layout) {
      this._layout = layoutDocument(this.dom.window.document, this.viewport);
      this._layoutDirty = false;
      this._png = null;
    }
    return this._layout;
  }

  hitTest(docX, docY) {
    const layout = this.ensureLayout();
    const doc = this.window.document;
    let winner = null;
    const walk = (el) => {
      const style = layout.styles.get(el);
      if (style && style.display === 'none') return;
      const box = layout.boxes.get(el);
      if (box && style && style.visibility !== 'hidden'
          && docX >= box.x && docX < box.x + box.w
          && docY >= box.y && docY < box.y + box.h) {
        winner = el;
      }
      for (const child of Array.from(el.children || [])) walk(child);
    };
    if (doc.documentElement) walk(doc.documentElement);
    return winner || doc.body || doc.documentElement;
  }

  // --- navigation ------------------------------------------------------------

  async load(url, options = {}) {
    if (url === 'about:blank') {
      this._attach(new JSDOM('<!doctype html><html><head></head><body></body></html>', this._jsdomOptions('about:blank')));
      if (!options.replace) this._pushHistory('about:blank');
      return;
    }
    if (this.isBlocked(url)) {
      throw err.unknown(`navigation blocked by content filter: ${url}`);
    }
    let res;
    try {
      res = await fetchUrl(url, {
        method: options.method || 'GET',
        body: options.body || null,
        headers: options.headers || {},
      });
    } catch (e) {
      throw err.unknown(`navigation failed for ${url}: ${e.message}`);
    }
    const contentType = String(res.headers['content-type'] || 'text/html');
    let html;
    if (/html/i.test(contentType)) {
      html = res.body.toString('utf-8');
    } else if (/^text\//i.test(contentType) || /json|xml|javascript/i.test(contentType)) {
      html = `<!doctype html><html><head><title></title></head><body><pre>${htmlEscape(res.body.toString('utf-8'))}</pre></body></html>`;
    } else {
      html = '<!doctype html><html><head><title></title></head><body></body></html>';
    }
    const dom = new JSDOM(html, this._jsdomOptions(res.finalUrl));
    await this._waitForLoad(dom.window);
    this._attach(dom);
    if (!options.replace) this._pushHistory(res.finalUrl);
    else if (this.historyIndex >= 0) this.history[this.historyIndex] = res.finalUrl;
  }

  _jsdomOptions(url) {
    const virtualConsole = new VirtualConsole();
    virtualConsole.on('jsdomError', (e) => {
      this.consoleEntries.push({ level: 'error', text: String(e && e.message ? e.message : e) });
    });
    for (const level of ['error', 'warn', 'log', 'info']) {
      virtualConsole.on(level, (...args) => {
        this.consoleEntries.push({ level, text: args.map(String).join(' ') });
      });
    }
    return {
      url,
      contentType: 'text/html',
      runScripts: 'dangerously',
      resources: new BlockingResourceLoader(this),
      pretendToBeVisual: true,
      virtualConsole,
      beforeParse: (window) => patchWindow(window, this),
    };
  }

  _waitForLoad(window, timeoutMs = 10000) {
    return new Promise((resolve) => {
      if (window.document.readyState === 'complete') {
        resolve();
        return;
      }
      const timer = setTimeout(resolve, timeoutMs);
      window.addEventListener('load', () => {
        clearTimeout(timer);
        resolve();
      });
    });
  }

  _attach(dom) {
    if (this.dom) {
      try {
        this.dom.window.close();
      } catch (e) { /* already torn down */ }
    }
    this.dom = dom;
    this.scrollX = 0;
    this.scrollY = 0;
    this.markDirty();
    const { window } = dom;
    const observer = new window.MutationObserver(() => this.markDirty());
    observer.observe(window.document, {
      subtree: true, childList: true, attributes: true, characterData: true,
    });
    this._mutationObserver = observer;
    window.addEventListener('input', () => this.markDirty(), true);
  }

  _pushHistory(url) {
    this.history = this.history.slice(0, this.historyIndex + 1);
    this.history.push(url);
    this.historyIndex = this.history.length - 1;
  }

  async navigate(url) {
    await this.load(url);
  }

  async back() {
    if (this.historyIndex <= 0) return; // silent no-op, like real drivers
    this.historyIndex -= 1;
    try {
      await this.load(this.history[this.historyIndex], { replace: true });
    } catch (e) {
      this.historyIndex += 1;
      throw e;
    }
  }

  async forward() {
    if (this.historyIndex >= this.history.length - 1) return;
    this.historyIndex += 1;
    try {
      await this.load(this.history[this.historyIndex], { replace: true });
    } catch (e) {
      this.historyIndex -= 1;
      throw e;
    }
  }

  async refresh() {
    if (this.historyIndex >= 0) {
      await this.load(this.history[this.historyIndex], { replace: true });
    }
  }

  // --- forms and CSP -----------------------------------------------------------

  cspDirectives() {
    const doc = this.window.document;
    const metas = doc.querySelectorAll('meta[http-equiv]');
    const directives = {};
    for (const meta of metas) {
      if ((meta.getAttribute('http-equiv') || '').toLowerCase() !== 'content-security-policy') continue;
      for (const part of (meta.getAttribute('content') || '').split(';')) {
        const tokens = part.trim().split(/\s+/).filter(Boolean);
        if (tokens.length > 0) directives[tokens[0].toLowerCase()] = tokens.slice(1);
      }
    }
    return directives;
  }

  cspAllows(directive, targetUrl) {
    const sources = this.cspDirectives()[directive];
    if (!sources) return true;
    const target = new URL(targetUrl, this.currentUrl);
    const page = new URL(this.currentUrl);
    for (const raw of sources) {
      const source = raw.replace(/^'(.*)'$/, '$1').toLowerCase();
      if (source === 'none') return false;
      if (source === '*') return true;
      if (source === 'self') {
        if (target.origin === page.origin) return true;
      } else if (target.origin === source || target.host === source) {
        return true;
      }
    }
    return false;
  }

  reportCspViolation(directive, blockedUri) {
    const { window } = this;
    const event = new window.Event('securitypolicyviolation', { bubbles: true });
    Object.assign(event, {
      violatedDirective: directive,
      effectiveDirective: directive,
      blockedURI: blockedUri,
      documentURI: this.currentUrl,
      disposition: 'enforce',
    });
    window.document.dispatchEvent(event);
    this.consoleEntries.push({
      level: 'error',
      text: `Content-Security-Policy: blocked ${blockedUri} (${directive})`,
    });
  }

  serializeForm(form) {
    const pairs = [];
    for (const el of Array.from(form.elements)) {
      const name = el.getAttribute('name');
      if (!name || el.disabled) continue;
      const tag = el.tagName.toLowerCase();
      if (tag === 'input') {
        const type = (el.getAttribute('type') || 'text').toLowerCase();
        if (['checkbox', 'radio'].includes(type)) {
          if (el.checked) pairs.push([name, el.value || 'on']);
        } else if (!['submit', 'button', 'reset', 'image', 'file'].includes(type)) {
          pairs.push([name, el.value || '']);
        }
      } else if (tag === 'textarea') {
        pairs.push([name, el.value || '']);
      } else if (tag === 'select') {
        const opt = el.selectedIndex >= 0 ? el.options[el.selectedIndex] : null;
        if (opt) pairs.push([name, opt.value != null ? opt.value : opt.textContent]);
      }
    }
    return pairs;
  }

  async submitForm(form, submitter) {
    const { window } = this;
    const event = new window.Event('submit', { bubbles: true, cancelable: true });
    if (submitter) event.submitter = submitter;
    const notPrevented = form.dispatchEvent(event);
    if (!notPrevented) return;

    const actionAttr = (submitter && submitter.getAttribute('formaction'))
      || form.getAttribute('action') || '';
    const target = new URL(actionAttr || this.currentUrl, this.currentUrl);
    if (!this.cspAllows('form-action', target.href)) {
      this.reportCspViolation('form-action', target.href);
      return;
    }

    const pairs = this.serializeForm(form);
    if (submitter && submitter.getAttribute('name')) {
      pairs.push([submitter.getAttribute('name'), submitter.getAttribute('value') || '']);
    }
    const encoded = pairs
      .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(v)}`)
      .join('&');
    const method = ((submitter && submitter.getAttribute('formmethod'))
      || form.getAttribute('method') || 'get').toLowerCase();
    try {
      if (method === 'post') {
        await this.load(target.href, {
          method: 'POST',
          body: encoded,
          headers: { 'content-type': 'application/x-www-form-urlencoded' },
        });
      } else {
        target.search = encoded ? `?${encoded}` : '';
        await this.load(target.href);
      }
    } catch (e) {
      // dead form target: keep the page alive and surface the failure
      this.consoleEntries.push({ level: 'error', text: `form submission failed: ${e.message}` });
    }
  }

  // --- element registry ----------------------------------------------------------

  registerElement(el) {
    let id = this.elementIds.get(el);
    if (!id) {
      id = crypto.randomUUID();
      this.elementIds.set(el, id);
      this.elements.set(id, el);
    }
    return { [ELEMENT_KEY]: id };
  }

  lookupElement(id) {
    const el = this.elements.get(id);
    if (!el) throw err.noSuchElement(`no element with reference ${id}`);
    if (!this.dom || el.ownerDocument !== this.dom.window.document || !el.isConnected) {
      throw err.stale(`element ${id} is no longer attached`);
    }
    return el;
  }

  resolveElementRef(ref) {
    if (ref && typeof ref === 'object' && ELEMENT_KEY in ref) {
      return this.lookupElement(ref[ELEMENT_KEY]);
    }
    return null;
  }

  findElements(selector) {
    let nodes;
    try {
      nodes = this.window.document.querySelectorAll(selector);
    } catch (e) {
      throw err.invalidArgument(`bad selector: ${selector}`);
    }
    return Array.from(nodes).map((el) => this.registerElement(el));
  }

  // --- script execution ------------------------------------------------------------

  executeScript(script, args) {
    const context = this.dom.getInternalVMContext();
    let fn;
    try {
      fn = vm.runInContext(`(function(){\n${script}\n})`, context, {
        timeout: 5000,
      });
    } catch (e) {
      throw err.jsError(`script compile failed: ${e.message}`);
    }
    const deserialized = (args || []).map((a) => this._deserialize(a));
    let result;
    try {
      result = fn.apply(this.window, deserialized);
    } catch (e) {
      throw err.jsError(`script threw: ${e && e.message ? e.message : e}`);
    }
    this.markDirty();
    return this._serialize(result, new Set());
  }

  _deserialize(value) {
    if (Array.isArray(value)) return value.map((v) => this._deserialize(v));
    if (value && typeof value === 'object') {
      if (ELEMENT_KEY in value) return this.lookupElement(value[ELEMENT_KEY]);
      const out = {};
      for (const [k, v] of Object.entries(value)) out[k] = this._deserialize(v);
      return out;
    }
    return value;
  }

  _serialize(value, seen) {
    if (value == null) return null;
    const t = typeof value;
    if (t === 'boolean' || t === 'string') return value;
    if (t === 'number') return Number.isFinite(value) ? value : null;
    if (t === 'function' || t === 'symbol' || t === 'bigint') return null;
    if (value.nodeType === 1) return this.registerElement(value);
    if (seen.has(value)) throw err.jsError('cannot serialize cyclic structure');
    seen.add(value);
    if (Array.isArray(value) || typeof value.length === 'number') {
      const out = [];
      const len = value.length || 0;
      for (let i = 0; i < len; i++) out.push(this._serialize(value[i], seen));
      seen.delete(value);
      return out;
    }
    const out = {};
    for (const [k, v] of Object.entries(value)) out[k] = this._serialize(v, seen);
    seen.delete(value);
    return out;
  }

  // --- rendering -----------------------------------------------------------------

  screenshotFull() {
    this.ensureLayout();
    if (!this._png) this._png = render(this);
    return this._png;
  }

  screenshotViewport() {
    return cropViewport(this.screenshotFull(), this.viewport, this.scrollY);
  }

  close() {
    this.closed = true;
    if (this.dom) {
      try {
        this.dom.window.close();
      } catch (e) { /* fine */ }
      this.dom = null;
    }
    this.elements.clear();
  }
}

module.exports = { Session, WebDriverError, err, ELEMENT_KEY };
