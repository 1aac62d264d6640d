'use strict';

// W3C WebDriver wire protocol endpoints over plain node http. Responses use
// the standard {"value": ...} envelope; errors carry the standard error
// codes so ordinary WebDriver clients can talk to this engine.

const http = require('http');
const crypto = require('crypto');

const { Session, WebDriverError, err } = require('./session');
const { inputLabel } = require('./layout');

function routeTable() {
  // [method, regex with named groups, handler(server, match, body)]
  return [
    ['GET', /^\/status$/, (srv) => ({ ready: true, message: 'microbrowser ready' })],

    ['POST', /^\/session$/, async (srv, m, body) => {
      const caps = (body && body.capabilities && body.capabilities.alwaysMatch) || {};
      const id = crypto.randomUUID();
      const session = new Session(id, caps);
      srv.sessions.set(id, session);
      await session.load('about:blank');
      return { sessionId: id, capabilities: caps };
    }],

    ['DELETE', /^\/session\/(?<sid>[^/]+)$/, async (srv, m) => {
      const session = srv.session(m.groups.sid);
      session.close();
      srv.sessions.delete(m.groups.sid);
      return null;
    }],

    ['POST', /^\/session\/(?<sid>[^/]+)\/url$/, (srv, m, body) =>
      srv.session(m.groups.sid).enqueue(async function navigate() {
        if (!body || typeof body.url !== 'string') throw err.invalidArgument('url required');
        await srv.session(m.groups.sid).navigate(body.url);
        return null;
      })],

    ['GET', /^\/session\/(?<sid>[^/]+)\/url$/, (srv, m) => srv.session(m.groups.sid).currentUrl],
    ['GET', /^\/session\/(?<sid>[^/]+)\/title$/, (srv, m) => srv.session(m.groups.sid).title],

    ['POST', /^\/session\/(?<sid>[^/]+)\/back$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(() => srv.session(m.groups.sid).back().then(() => null))],
    ['POST', /^\/session\/(?<sid>[^/]+)\/forward$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(() => srv.session(m.groups.sid).forward().then(() => null))],
    ['POST', /^\/session\/(?<sid>[^/]+)\/refresh$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(() => srv.session(m.groups.sid).refresh().then(() => null))],

    ['GET', /^\/session\/(?<sid>[^/]+)\/window\/rect$/, (srv, m) => {
      const s = srv.session(m.groups.sid);
      return { x: 0, y: 0, width: s.viewport.width, height: s.viewport.height };
    }],
    ['POST', /^\/session\/(?<sid>[^/]+)\/window\/rect$/, (srv, m, body) => {
      const s = srv.session(m.groups.sid);
      s.setViewport(
        body && body.width ? Math.round(body.width) : s.viewport.width,
        body && body.height ? Math.round(body.height) : s.viewport.height,
      );
      return { x: 0, y: 0, width: s.viewport.width, height: s.viewport.height };
    }],

    ['GET', /^\/session\/(?<sid>[^/]+)\/screenshot\/full$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(() =>
        srv.session(m.groups.sid).screenshotFull().toString('base64'))],
    // geckodriver spells its full-page extension differently
    ['GET', /^\/session\/(?<sid>[^/]+)\/moz\/screenshot\/full$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(() =>
        srv.session(m.groups.sid).screenshotFull().toString('base64'))],
    ['GET', /^\/session\/(?<sid>[^/]+)\/screenshot$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(() =>
        srv.session(m.groups.sid).screenshotViewport().toString('base64'))],

    ['POST', /^\/session\/(?<sid>[^/]+)\/elements$/, (srv, m, body) => {
      if (!body || body.using !== 'css selector') {
        throw err.invalidArgument('only css selector is supported');
      }
      return srv.session(m.groups.sid).findElements(body.value);
    }],
    ['POST', /^\/session\/(?<sid>[^/]+)\/element$/, (srv, m, body) => {
      if (!body || body.using !== 'css selector') {
        throw err.invalidArgument('only css selector is supported');
      }
      const found = srv.session(m.groups.sid).findElements(body.value);
      if (found.length === 0) throw err.noSuchElement(`nothing matches ${body.value}`);
      return found[0];
    }],

    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/active$/, (srv, m) => {
      const s = srv.session(m.groups.sid);
      const active = s.window.document.activeElement;
      if (!active) throw err.noSuchElement('no active element');
      return s.registerElement(active);
    }],

    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/rect$/, (srv, m) => {
      const s = srv.session(m.groups.sid);
      const el = s.lookupElement(m.groups.eid);
      const layout = s.ensureLayout();
      const box = layout.boxes.get(el);
      if (!box) return { x: 0, y: 0, width: 0, height: 0 };
      return { x: box.x, y: box.y, width: box.w, height: box.h };
    }],
    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/text$/, (srv, m) => {
      const s = srv.session(m.groups.sid);
      const el = s.lookupElement(m.groups.eid);
      return (el.textContent || '').replace(/\s+/g, ' ').trim();
    }],
    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/name$/, (srv, m) =>
      srv.session(m.groups.sid).lookupElement(m.groups.eid).tagName.toLowerCase()],
    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/enabled$/, (srv, m) =>
      !srv.session(m.groups.sid).lookupElement(m.groups.eid).disabled],
    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/displayed$/, (srv, m) => {
      const s = srv.session(m.groups.sid);
      const el = s.lookupElement(m.groups.eid);
      const layout = s.ensureLayout();
      const style = layout.styles.get(el);
      const box = layout.boxes.get(el);
      return Boolean(style && style.display !== 'none' && style.visibility !== 'hidden'
        && box && box.w > 0 && box.h > 0);
    }],
    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/property\/(?<name>[^/]+)$/, (srv, m) => {
      const el = srv.session(m.groups.sid).lookupElement(m.groups.eid);
      const value = el[m.groups.name];
      if (value == null) return null;
      if (typeof value === 'object') return String(value);
      return value;
    }],
    ['GET', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/attribute\/(?<name>[^/]+)$/, (srv, m) =>
      srv.session(m.groups.sid).lookupElement(m.groups.eid).getAttribute(m.groups.name)],

    ['POST', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/click$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(async () => {
        const s = srv.session(m.groups.sid);
        const el = s.lookupElement(m.groups.eid);
        const layout = s.ensureLayout();
        const box = layout.boxes.get(el);
        if (!box) throw err.unknown('element has no box');
        await s.input.clickAt(box.x + box.w / 2, box.y + box.h / 2);
        return null;
      })],
    ['POST', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/value$/, (srv, m, body) =>
      srv.session(m.groups.sid).enqueue(async () => {
        const s = srv.session(m.groups.sid);
        const el = s.lookupElement(m.groups.eid);
        el.focus();
        const text = body && body.text != null ? String(body.text) : '';
        for (const ch of text) {
          await s.input.pressKey(ch);
        }
        return null;
      })],
    ['POST', /^\/session\/(?<sid>[^/]+)\/element\/(?<eid>[^/]+)\/clear$/, (srv, m) =>
      srv.session(m.groups.sid).enqueue(() => {
        const s = srv.session(m.groups.sid);
        const el = s.lookupElement(m.groups.eid);
        el.value = '';
        s.markDirty();
        return null;
      })],

    ['POST', /^\/session\/(?<sid>[^/]+)\/execute\/sync$/, (srv, m, body) =>
      srv.session(m.groups.sid).enqueue(() => {
        if (!body || typeof body.script !== 'string') throw err.invalidArgument('script required');
        return srv.session(m.groups.sid).executeScript(body.script, body.args || []);
      })],

    ['POST', /^\/session\/(?<sid>[^/]+)\/actions$/, (srv, m, body) =>
      srv.session(m.groups.sid).enqueue(async () => {
        await srv.session(m.groups.sid).input.perform((body && body.actions) || []);
        return null;
      })],

    // Extension: console + CSP diagnostics collected by the engine.
    ['GET', /^\/session\/(?<sid>[^/]+)\/console$/, (srv, m) =>
      srv.session(m.groups.sid).consoleEntries.slice()],
  ];
}

class WebDriverServer {
  constructor() {
    this.sessions = new Map();
    this.routes = routeTable();
    this.httpServer = http.createServer((req, res) => this.handle(req, res));
  }

  session(id) {
    const session = this.sessions.get(id);
    if (!session || session.closed) throw err.invalidSession();
    return session;
  }

  handle(req, res) {
    const chunks = [];
    req.on('data', (c) => chunks.push(c));
    req.on('end', async () => {
      let body = null;
      if (chunks.length > 0) {
        try {
          body = JSON.parse(Buffer.concat(chunks).toString('utf-8'));
        } catch (e) {
          this.reply(res, 400, { value: { error: 'invalid argument', message: 'bad json', stacktrace: '' } });
          return;
        }
      }
      const path = req.url.split('?')[0];
      for (const [method, regex, handler] of this.routes) {
        if (req.method !== method) continue;
        const match = path.match(regex);
        if (!match) continue;
        try {
          const value = await handler(this, match, body);
          this.reply(res, 200, { value: value === undefined ? null : value });
        } catch (e) {
          const status = e instanceof WebDriverError ? e.status : 500;
          const code = e instanceof WebDriverError ? e.code : 'unknown error';
          this.reply(res, status, {
            value: { error: code, message: String(e.message || e), stacktrace: '' },
          });
        }
        return;
      }
      this.reply(res, 404, {
        value: { error: 'unknown command', message: `${req.method} ${path}`, stacktrace: '' },
      });
    });
  }

  reply(res, status, payload) {
    const data = Buffer.from(JSON.stringify(payload), 'utf-8');
    res.writeHead(status, {
      'content-type': 'application/json; charset=utf-8',
      'content-length': data.length,
      'cache-control': 'no-cache',
    });
    res.end(data);
  }

  listen(port, host) {
    return new Promise((resolve) => {
      this.httpServer.listen(port, host, () => resolve(this.httpServer.address()));
    });
  }

  closeAll() {
    for (const session of this.sessions.values()) session.close();
    this.sessions.clear();
    this.httpServer.close();
  }
}

module.exports = { WebDriverServer, inputLabel };
