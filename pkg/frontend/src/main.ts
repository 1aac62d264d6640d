// Boot: read the pairing token the bootstrap page embedded, announce the
// real viewport, and start the session at whatever path the viewer landed
// on, so deep links replay onto the mirrored site's matching page.

import { MirrorSession } from './session.js';

function boot(): void {
  const meta = document.querySelector('meta[name="mirrorcast-token"]');
  const token = meta?.getAttribute('content');
  const root = document.getElementById('mc-root');
  if (!token || !root) {
    console.error('bootstrap page is missing its token or root node');
    return;
  }
  const session = new MirrorSession({
    baseUrl: `${location.protocol}//${location.host}`,
    token,
    root,
    doc: document,
    win: window,
  });
  session.connect().catch((error) => {
    console.error('mirror session failed to start', error);
  });
}

if (document.readyState === 'loading') {
  document.addEventListener('DOMContentLoaded', boot);
} else {
  boot();
}
