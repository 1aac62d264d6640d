'use strict';

// Plain http(s) fetching with redirect following. The engine performs every
// page load and form submission through this, so all origin traffic leaves
// from the browser process itself.

const http = require('http');
const https = require('https');
const { URL } = require('url');

const MAX_REDIRECTS = 10;

function requestOnce(url, options) {
  return new Promise((resolve, reject) => {
    const parsed = new URL(url);
    const mod = parsed.protocol === 'https:' ? https : http;
    const req = mod.request(
      parsed,
      {
        method: options.method || 'GET',
        headers: Object.assign(
          { 'user-agent': 'microbrowser/0.1', accept: '*/*' },
          options.headers || {},
        ),
        timeout: options.timeoutMs || 15000,
        rejectUnauthorized: false,
      },
      (res) => {
        const chunks = [];
        res.on('data', (c) => chunks.push(c));
        res.on('end', () => {
          resolve({
            status: res.statusCode,
            headers: res.headers,
            body: Buffer.concat(chunks),
          });
        });
      },
    );
    req.on('timeout', () => {
      req.destroy(new Error(`timeout fetching ${url}`));
    });
    req.on('error', reject);
    if (options.body) req.write(options.body);
    req.end();
  });
}

// Resolves with {status, headers, body, finalUrl}. 3xx responses are chased;
// 303 (and 301/302 on non-GET) downgrade to GET like browsers do.
async function fetchUrl(url, options = {}) {
  let current = url;
  let method = options.method || 'GET';
  let body = options.body || null;
  let headers = options.headers || {};
  for (let hop = 0; hop <= MAX_REDIRECTS; hop++) {
    const res = await requestOnce(current, { ...options, method, body, headers });
    const loc = res.headers.location;
    if (res.status >= 300 && res.status < 400 && loc) {
      current = new URL(loc, current).href;
      if (res.status === 303 || ((res.status === 301 || res.status === 302) && method !== 'GET')) {
        method = 'GET';
        body = null;
        headers = { ...headers };
        delete headers['content-type'];
        delete headers['content-length'];
      }
      continue;
    }
    return { ...res, finalUrl: current };
  }
  throw new Error(`too many redirects for ${url}`);
}

module.exports = { fetchUrl };
