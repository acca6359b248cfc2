/** CLI entry point: `node dist/server.js [--port N] [--mode stub] [--dim N]`. */

import { createApp, StubAnnotator } from './app.js';

interface Options {
  port: number;
  mode: string;
  dimension: number;
}

function parseArgs(argv: string[]): Options {
  const opts: Options = { port: 9000, mode: 'stub', dimension: 64 };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      const value = argv[++i];
      if (value === undefined) throw new Error(`${arg} needs a value`);
      return value;
    };
    switch (arg) {
      case '--port':
        opts.port = Number(next());
        break;
      case '--mode':
        opts.mode = next();
        break;
      case '--dim':
        opts.dimension = Number(next());
        break;
      default:
        throw new Error(`unknown argument ${arg}`);
    }
  }
  return opts;
}

function main(): void {
  let opts: Options;
  try {
    opts = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    process.exit(2);
  }
  if (opts.mode !== 'stub') {
    // A model-backed annotator is configuration another deployment supplies;
    // this build ships only the deterministic stub.
    console.error(`error: mode ${JSON.stringify(opts.mode)} not available in this build (only "stub")`);
    process.exit(2);
  }
  const app = createApp(new StubAnnotator(opts.dimension));
  app.listen(opts.port, () => {
    console.log(`annotator listening on :${opts.port} (mode=stub, dim=${opts.dimension})`);
  });
}

main();
