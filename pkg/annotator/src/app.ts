/** HTTP surface of the annotation sidecar.
 *
 * POST /parse    {text}            -> CoNLL-U text
 * POST /embed    {text, span}      -> {vector, dimension}
 * POST /classify {text}            -> {level, probabilities}
 * GET  /health                     -> {status, mode, dimension}
 *
 * Every handler is a thin shell around an Annotator implementation; the
 * bundled one is the deterministic stub.  A model-backed implementation
 * plugs in behind the same interface with its identifiers supplied as
 * configuration.
 */

import express, { type Express, type Request, type Response } from 'express';
import { classify, type Classification } from './classify.js';
import { parseToConllu } from './conllu.js';
import { embedSpan } from './embed.js';

export interface Annotator {
  readonly mode: string;
  readonly dimension: number;
  parse(text: string): string;
  embed(text: string, start: number, end: number): number[];
  classify(text: string): Classification;
}

export class StubAnnotator implements Annotator {
  readonly mode = 'stub';
  readonly dimension: number;

  constructor(dimension = 64) {
    if (!Number.isInteger(dimension) || dimension < 1) {
      throw new Error(`dimension must be a positive integer, got ${dimension}`);
    }
    this.dimension = dimension;
  }

  parse(text: string): string {
    return parseToConllu(text);
  }

  embed(text: string, start: number, end: number): number[] {
    return embedSpan(text, start, end, this.dimension);
  }

  classify(text: string): Classification {
    return classify(text);
  }
}

function badRequest(res: Response, message: string): void {
  res.status(400).json({ error: { type: 'bad_request', message } });
}

function textField(req: Request, res: Response): string | null {
  const body = req.body as unknown;
  if (typeof body !== 'object' || body === null) {
    badRequest(res, 'body must be a JSON object');
    return null;
  }
  const text = (body as Record<string, unknown>).text;
  if (typeof text !== 'string' || text.trim() === '') {
    badRequest(res, 'field "text" must be a non-empty string');
    return null;
  }
  return text;
}

export function createApp(annotator: Annotator): Express {
  const app = express();
  app.use(express.json({ limit: '1mb' }));
  // Malformed JSON bodies surface as our 400 envelope, not an HTML error page.
  app.use(
    (err: Error & { type?: string }, _req: Request, res: Response, next: (e?: Error) => void) => {
      if (err.type === 'entity.parse.failed' || err instanceof SyntaxError) {
        badRequest(res, `unparseable JSON body: ${err.message}`);
        return;
      }
      next(err);
    },
  );

  app.get('/health', (_req, res) => {
    res.json({ status: 'ok', mode: annotator.mode, dimension: annotator.dimension });
  });

  app.post('/parse', (req, res) => {
    const text = textField(req, res);
    if (text === null) return;
    let conllu: string;
    try {
      conllu = annotator.parse(text);
    } catch (err) {
      badRequest(res, `unparseable input: ${(err as Error).message}`);
      return;
    }
    res.type('text/plain; charset=utf-8').send(conllu);
  });

  app.post('/embed', (req, res) => {
    const text = textField(req, res);
    if (text === null) return;
    const span = (req.body as Record<string, unknown>).span;
    if (
      !Array.isArray(span) ||
      span.length !== 2 ||
      typeof span[0] !== 'number' ||
      typeof span[1] !== 'number'
    ) {
      badRequest(res, 'field "span" must be [start, end]');
      return;
    }
    let vector: number[];
    try {
      vector = annotator.embed(text, span[0], span[1]);
    } catch (err) {
      badRequest(res, (err as Error).message);
      return;
    }
    res.json({ vector, dimension: annotator.dimension });
  });

  app.post('/classify', (req, res) => {
    const text = textField(req, res);
    if (text === null) return;
    res.json(annotator.classify(text));
  });

  return app;
}
