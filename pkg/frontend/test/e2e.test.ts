// @vitest-environment jsdom
//
// Full-stack acceptance for the viewer client: a scripted browser (this
// jsdom document driven by the real client modules over real websockets)
// against a live gateway mirroring the login fixture.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { ChildProcess, spawn } from 'node:child_process';
import { mkdtempSync, readdirSync, readFileSync } from 'node:fs';
import { createServer } from 'node:net';
import { tmpdir } from 'node:os';
import { join, resolve } from 'node:path';
import WebSocket from 'ws';

import { MirrorSession } from '../src/session.js';
import { RecordingSink } from '../src/render.js';
import { EnrichedView, UIElement } from '../src/protocol.js';

// vitest runs with cwd = frontend/; the python package sits one level up
const repoRoot = resolve(process.cwd(), '..');

let fixtureProc: ChildProcess;
let gatewayProc: ChildProcess;
let baseUrl: string;
let storageDir: string;
const sessions: MirrorSession[] = [];

function readLine(proc: ChildProcess): Promise<string> {
  return new Promise((resolve, reject) => {
    let buffer = '';
    proc.stdout!.on('data', (chunk) => {
      buffer += String(chunk);
      const nl = buffer.indexOf('\n');
      if (nl >= 0) resolve(buffer.slice(0, nl));
    });
    proc.on('exit', (code) => reject(new Error(`process exited early (${code})`)));
    setTimeout(() => reject(new Error('no output line')), 30_000);
  });
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, '127.0.0.1', () => {
      const port = (server.address() as any).port;
      server.close(() => resolve(port));
    });
    server.on('error', reject);
  });
}

async function waitHttp(url: string, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(url);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`server at ${url} never came up`);
}

async function startSession(): Promise<{ session: MirrorSession; first: EnrichedView }> {
  const page = await (await fetch(baseUrl + '/')).text();
  const token = /name="mirrorcast-token" content="([^"]+)"/.exec(page)?.[1];
  expect(token).toBeTruthy();

  document.body.innerHTML = '<div id="mc-root"></div>';
  const session = new MirrorSession({
    baseUrl,
    token: token!,
    root: document.getElementById('mc-root')!,
    doc: document,
    win: window,
    initialPath: '/',
    viewport: { width: 1280, height: 720 },
    sink: new RecordingSink(),
    webSocketImpl: WebSocket as unknown as typeof globalThis.WebSocket,
  });
  sessions.push(session);
  const first = new Promise<EnrichedView>((resolve) => {
    session.onView((view) => resolve(view));
  });
  await session.connect();
  return { session, first: await first };
}

function awaitView(
  session: MirrorSession,
  predicate: (view: EnrichedView) => boolean,
  timeoutMs = 20_000,
): Promise<EnrichedView> {
  return new Promise((resolve, reject) => {
    const timer = setTimeout(
      () => reject(new Error(`no matching view within ${timeoutMs}ms`)),
      timeoutMs,
    );
    session.onView((view) => {
      if (predicate(view)) {
        clearTimeout(timer);
        resolve(view);
      }
    });
  });
}

function textBoxes(view: EnrichedView): UIElement[] {
  return view.meta.elements
    .filter((el) => el.kind === 'textBox')
    .sort((a, b) => a.y - b.y);
}

function clickThrough(session: MirrorSession, widget: HTMLElement, el: UIElement): void {
  const x = el.x + Math.floor(el.width / 2);
  const y = el.y + Math.floor(el.height / 2);
  for (const type of ['mousedown', 'mouseup']) {
    widget.dispatchEvent(new MouseEvent(type, {
      bubbles: true, cancelable: true, clientX: x, clientY: y, button: 0,
    }));
  }
}

beforeAll(async () => {
  fixtureProc = spawn('python3', ['tests/fixture_server.py', '--site', 'site_login'], {
    cwd: repoRoot,
    stdio: ['ignore', 'pipe', 'inherit'],
  });
  const fixtureInfo = JSON.parse(await readLine(fixtureProc));

  storageDir = mkdtempSync(join(tmpdir(), 'mc-e2e-'));
  const port = await freePort();
  gatewayProc = spawn('python3', [
    '-m', 'mirrorcast',
    '--target', fixtureInfo.url,
    '--port', String(port),
    '--storage', storageDir,
    '--quiescence-ms', '120',
  ], { cwd: repoRoot, stdio: ['ignore', 'inherit', 'inherit'] });
  baseUrl = `http://127.0.0.1:${port}`;
  await waitHttp(baseUrl + '/');
}, 90_000);

afterAll(() => {
  for (const session of sessions) session.close();
  gatewayProc?.kill('SIGTERM');
  fixtureProc?.kill('SIGTERM');
});

describe('secondary acceptance', () => {
  it('overlay geometry matches the login fixture descriptors within 1px', async () => {
    const { session, first } = await startSession();
    const manifest = JSON.parse(readFileSync(
      join(repoRoot, 'tests/fixtures/site_login/manifest.json'), 'utf-8',
    ));

    const boxes = textBoxes(first);
    const named: Record<string, UIElement> = {
      username: boxes[0],
      password: boxes[1],
      signin: first.meta.elements.find((el) => el.kind === 'button' && el.text === 'Sign in')!,
      help: first.meta.elements.find((el) => el.text === 'Help')!,
      about: first.meta.elements.find((el) => el.text === 'About')!,
      forgot: first.meta.elements.find((el) => el.text === 'Forgot password')!,
    };

    for (const [name, [x, y, w, h]] of Object.entries(manifest.boxes) as Array<[string, number[]]>) {
      const descriptor = named[name];
      expect(descriptor, name).toBeTruthy();
      const widget = session.overlay.widget(descriptor.elementId)!;
      expect(widget, name).toBeTruthy();
      const rendered = [
        parseFloat(widget.style.left),
        parseFloat(widget.style.top),
        parseFloat(widget.style.width),
        parseFloat(widget.style.height),
      ];
      const authored = [x, y, w, h];
      rendered.forEach((value, i) => {
        expect(Math.abs(value - authored[i]), `${name}[${i}]`).toBeLessThanOrEqual(1);
      });
    }
    session.close();
  });

  it('completes the login flow end to end and the log holds the credentials', async () => {
    const { session, first } = await startSession();
    expect(first.meta.displayPath).toBe('/');
    expect(document.title).toBe('Login Fixture ログイン ø');
    expect(first.image).not.toBeNull();

    const [userBox, passBox] = textBoxes(first);
    expect(userBox.inputType).toBe('text');
    expect(passBox.inputType).toBe('password');

    const userWidget = session.overlay.widget(userBox.elementId) as HTMLInputElement;
    userWidget.value = 'e2e-user';
    userWidget.dispatchEvent(new InputEvent('input', { bubbles: true }));
    await awaitView(session, (view) => textBoxes(view)[0]?.text === 'e2e-user');

    const passWidget = session.overlay.widget(passBox.elementId) as HTMLInputElement;
    expect(passWidget.getAttribute('type')).toBe('password');
    passWidget.value = 'hunter2-e2e';
    passWidget.dispatchEvent(new InputEvent('input', { bubbles: true }));
    await awaitView(session, (view) => textBoxes(view)[1]?.text === 'hunter2-e2e');

    // element handles are stable for the lifetime of the page, so the
    // first view's descriptor still names the live button
    const signin = first.meta.elements.find(
      (el) => el.kind === 'button' && el.text === 'Sign in',
    )!;
    const signinWidget = session.overlay.widget(signin.elementId)!;
    clickThrough(session, signinWidget, signin);

    const welcome = await awaitView(
      session,
      (view) => view.meta.displayPath.startsWith('/welcome.html'),
    );
    expect(welcome.meta.pageTitle).toBe('Welcome Fixture');
    expect(document.title).toBe('Welcome Fixture');
    expect(window.location.pathname).toBe('/welcome.html');

    session.close();

    // the recorded session must hold exactly what was typed
    const sessionDirs = readdirSync(storageDir).filter((name) => !name.endsWith('.zip'));
    const allEvents = sessionDirs.flatMap((dir) => {
      try {
        return readFileSync(join(storageDir, dir, 'events.ndjson'), 'utf-8')
          .split('\n')
          .filter(Boolean)
          .map((line) => JSON.parse(line));
      } catch {
        return [];
      }
    });
    const typed = allEvents
      .filter((e) => e.event.kind === 'textChanged' || e.event.kind === 'paste')
      .map((e) => e.event.text);
    expect(typed).toContain('e2e-user');
    expect(typed).toContain('hunter2-e2e');
    const clicks = allEvents.filter((e) => e.event.kind === 'click');
    expect(clicks.length).toBeGreaterThanOrEqual(1);
  });
});
