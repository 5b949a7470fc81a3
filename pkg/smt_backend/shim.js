#!/usr/bin/env node
// Incremental SMT-LIB2 REPL over the Z3 WASM build, equivalent to `z3 -in`:
// reads commands from stdin, evaluates them in a persistent context, writes
// solver output to stdout. (reset) discards the context, (exit) terminates.
//
// Complete top-level forms are buffered and handed to eval_smtlib2_string in
// one call per (echo ...) sync point. The one-call granularity matters: the
// WASM build keeps parser state on the context between eval calls, and
// feeding it one logical command stream as several large eval calls corrupts
// that state now and then ("unexpected character" on clean input). Callers
// must therefore frame every request with a trailing (echo "marker"); output
// for a request appears only once its marker form is evaluated.

'use strict';

const { init } = require('z3-solver');

async function main() {
  const { Z3, em } = await init();
  // This build's default arithmetic core is an order of magnitude slower on
  // div/mod-heavy formulas with array lookups; pin the classic simplex core.
  // (Global so it applies to every context, matching `z3 smt.arith_solver=2`.)
  try {
    Z3.global_param_set('smt.arith.solver', '2');
  } catch (e) { /* parameter unknown in this build: keep the default */ }
  let ctx = Z3.mk_context(Z3.mk_config());

  // Z3.eval_smtlib2_string marshals the script onto the wasm stack, but the
  // evaluation itself runs off-thread and keeps reading that memory after
  // the stack frame is popped — any main-thread activity meanwhile (timer
  // callbacks, context calls) can clobber the script mid-parse. Pin the
  // bytes in the heap for the lifetime of the call instead.
  async function evalPinned(script) {
    const bytes = new TextEncoder().encode(script);
    const ptr = em._malloc(bytes.length + 1);
    em.HEAPU8.set(bytes, ptr);
    em.HEAPU8[ptr + bytes.length] = 0;
    try {
      return await em.async_call(() => em.ccall(
        'async_Z3_eval_smtlib2_string', 'void',
        ['number', 'number'], [ctx, ptr]));
    } finally {
      em._free(ptr);
    }
  }

  // --- form splitter ------------------------------------------------------
  // Depth-counting scanner, aware of "..." strings (the "" escape re-toggles
  // harmlessly), |...| symbols and ; comments. Holds partial forms across
  // chunk boundaries.
  let buf = '';
  let scanIdx = 0;
  let depth = 0;
  let mode = 0; // 0 code, 1 string, 2 comment, 3 quoted symbol
  let formStart = -1;

  function extractForms() {
    const out = [];
    while (scanIdx < buf.length) {
      const c = buf[scanIdx];
      if (mode === 1) {
        if (c === '"') mode = 0;
      } else if (mode === 2) {
        if (c === '\n') mode = 0;
      } else if (mode === 3) {
        if (c === '|') mode = 0;
      } else if (c === '"') {
        mode = 1;
      } else if (c === ';') {
        mode = 2;
      } else if (c === '|') {
        mode = 3;
      } else if (c === '(') {
        if (depth === 0) formStart = scanIdx;
        depth += 1;
      } else if (c === ')') {
        depth -= 1;
        if (depth === 0) {
          out.push(buf.slice(formStart, scanIdx + 1));
          formStart = -1;
        } else if (depth < 0) {
          depth = 0; // stray ')': ignore
        }
      }
      scanIdx += 1;
    }
    const keepFrom = depth > 0 && formStart >= 0 ? formStart : scanIdx;
    if (keepFrom > 0) {
      buf = buf.slice(keepFrom);
      scanIdx -= keepFrom;
      if (formStart >= 0) formStart -= keepFrom;
    }
    return out;
  }

  // --- sequential executor ------------------------------------------------
  let exiting = false;

  const debugDir = process.env.SHIM_DEBUG_DIR;
  let debugN = 0;

  function trace(msg) {
    if (!debugDir) return;
    require('fs').appendFileSync(
      `${debugDir}/trace.log`, `${Date.now() % 1e7} ${msg}\n`);
  }

  async function evalBatch(batch) {
    if (!batch.length) return;
    const script = batch.join('\n');
    let out;
    trace(`eval start: ${batch.length} forms, ${script.length} chars`);
    try {
      out = await evalPinned(script);
    } catch (err) {
      out = `(error "shim: ${String(err).replace(/"/g, "'")}")`;
    }
    trace(`eval done: ${out ? out.length : 0} chars out`);
    if (debugDir && out && out.includes('(error')) {
      const p = `${debugDir}/batch_${debugN++}.smt2`;
      require('fs').writeFileSync(p, `;; out: ${out.replace(/\n/g, ' | ')}\n` + script);
    }
    if (out && out.length) {
      process.stdout.write(out.endsWith('\n') ? out : out + '\n');
    }
  }

  let pending = [];

  async function flush() {
    const batch = pending;
    pending = [];
    await evalBatch(batch);
  }

  async function runForms(forms) {
    for (const form of forms) {
      const m = /^\(\s*([^\s()]+)/.exec(form);
      const head = m ? m[1] : '';
      if (head === 'exit') {
        await flush();
        exiting = true;
        return;
      }
      if (head === 'reset') {
        await flush();
        trace('reset');
        Z3.del_context(ctx);
        ctx = Z3.mk_context(Z3.mk_config());
        continue;
      }
      if (head === 'echo') {
        // answer framing markers ourselves so a response line arrives even
        // if the solver state is useless; everything queued runs first
        await flush();
        const m2 = /^\(\s*echo\s+"((?:[^"]|"")*)"/.exec(form);
        trace(`echo ${m2 ? m2[1] : '?'}`);
        process.stdout.write((m2 ? m2[1].replace(/""/g, '"') : '') + '\n');
        continue;
      }
      pending.push(form);
    }
  }

  let chain = Promise.resolve();
  let ended = false;

  function maybeFinish() {
    if (exiting || ended) {
      process.stdout.write('', () => process.exit(0));
    }
  }

  process.stdin.setEncoding('utf8');
  process.stdin.on('data', (chunk) => {
    if (exiting) return;
    buf += chunk;
    const forms = extractForms();
    if (forms.length) {
      chain = chain
        .then(() => runForms(forms))
        .catch((err) => {
          // never leave the chain rejected: that would silence every
          // later request
          trace(`chain error: ${err}`);
          process.stderr.write(`shim: ${err}\n`);
        })
        .then(maybeFinish);
    }
  });
  process.stdin.on('end', () => {
    chain = chain.then(async () => {
      await flush();
      ended = true;
      maybeFinish();
    });
  });
}

main().catch((err) => {
  process.stderr.write(`shim fatal: ${err}\n`);
  process.exit(3);
});
