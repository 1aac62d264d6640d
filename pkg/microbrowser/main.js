#!/usr/bin/env node
'use strict';

// Entry point: starts the WebDriver server on 127.0.0.1 and prints one JSON
// line with the bound port so a parent process can discover it. Exits when
// stdin closes, so an abandoned parent cannot leak engine processes.

const { WebDriverServer } = require('./lib/server');

function parseArgs(argv) {
  const args = { port: 0 };
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === '--port' && argv[i + 1] != null) {
      args.port = parseInt(argv[i + 1], 10) || 0;
      i++;
    } else if (argv[i].startsWith('--port=')) {
      args.port = parseInt(argv[i].slice(7), 10) || 0;
    }
  }
  return args;
}

async function main() {
  const args = parseArgs(process.argv.slice(2));
  const server = new WebDriverServer();
  const address = await server.listen(args.port, '127.0.0.1');
  process.stdout.write(`${JSON.stringify({ port: address.port })}\n`);

  const shutdown = () => {
    server.closeAll();
    process.exit(0);
  };
  process.on('SIGTERM', shutdown);
  process.on('SIGINT', shutdown);
  process.stdin.resume();
  process.stdin.on('end', shutdown);
  process.stdin.on('close', shutdown);
}

main().catch((e) => {
  process.stderr.write(`fatal: ${e.stack || e}\n`);
  process.exit(1);
});
