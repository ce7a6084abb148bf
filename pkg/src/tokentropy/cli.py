"""Command-line entry points.

    tokentropy analyze   score a record file or a prompt via a backend,
                         write the session report
    tokentropy reversal  score a text and its word-reversed form, print
                         the side-by-side aggregate table
    tokentropy monitor   stream records through the drift monitor
    tokentropy serve     run the HTTP API (and the web UI, with --assets)

Exit codes: 0 success, 2 unusable input or bad usage, 3 backend failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .backend import BackendDescriptor, fetch_logprobs
from .errors import (
    BackendError,
    BackendTimeout,
    TokentropyError,
    UnsupportedBackend,
)
from .metrics import METRIC_KINDS, token_metrics
from .monitor import MonitorState
from .records import LogitsBuffer, parse_record_line, parse_records
from .session import build_session, compare, render_report_bytes, reverse_words

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BACKEND = 3

BACKEND_ERRORS = (BackendError, BackendTimeout, UnsupportedBackend)


def _backend_from_args(args) -> BackendDescriptor:
    return BackendDescriptor(
        base_url=args.backend,
        model=args.model,
        top_k=args.topk,
        auth_env=args.auth_env,
    )


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def cmd_analyze(args) -> int:
    if bool(args.records) == bool(args.backend):
        print("analyze needs exactly one of --records or --backend", file=sys.stderr)
        print(
            "usage: tokentropy analyze (--records FILE | --backend URL "
            "--prompt-file FILE) [--out PATH]",
            file=sys.stderr,
        )
        return EXIT_INPUT
    try:
        if args.records:
            buffer = LogitsBuffer(args.logits_buffer) if args.logits_buffer else None
            distributions, texts = parse_records(
                _read_text(args.records).splitlines(), logits_buffer=buffer
            )
            session = build_session(args.label or args.records, distributions, texts)
        else:
            if not args.prompt_file:
                print("--backend requires --prompt-file", file=sys.stderr)
                return EXIT_INPUT
            prompt = _read_text(args.prompt_file).strip()
            distributions, texts = fetch_logprobs(_backend_from_args(args), prompt)
            session = build_session(
                args.label or args.prompt_file, distributions, texts, source_text=prompt
            )
    except BACKEND_ERRORS as exc:
        print(f"backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (TokentropyError, OSError) as exc:
        print(f"cannot analyze input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload = render_report_bytes(session)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


def cmd_reversal(args) -> int:
    try:
        text = " ".join(_read_text(args.prompt_file).split())
    except OSError as exc:
        print(f"cannot read text: {exc}", file=sys.stderr)
        return EXIT_INPUT
    backend = _backend_from_args(args)
    try:
        sessions = []
        for label, prompt in (("original", text), ("reversed", reverse_words(text))):
            distributions, texts = fetch_logprobs(backend, prompt)
            sessions.append(
                build_session(label, distributions, texts, source_text=prompt)
            )
    except BACKEND_ERRORS as exc:
        print(f"backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except TokentropyError as exc:
        print(f"cannot analyze input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = compare(sessions[0], sessions[1])
    print(report.render_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, ensure_ascii=False, indent=2)
            f.write("\n")
    return EXIT_OK


def cmd_monitor(args) -> int:
    try:
        stream = sys.stdin if args.records == "-" else open(args.records, encoding="utf-8")
    except OSError as exc:
        print(f"cannot open stream: {exc}", file=sys.stderr)
        return EXIT_INPUT
    state = MonitorState(capacity=args.window, k=args.alarm_k)
    print(f"monitoring window={args.window} k={args.alarm_k} baseline_after={args.baseline}")
    skipped = 0
    seen_alarms = 0
    try:
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d, _ = parse_record_line(line, lineno=lineno)
            except TokentropyError as exc:
                skipped += 1
                print(f"skipped record: {exc}", file=sys.stderr)
                continue
            state.observe(token_metrics(d))
            if state.baselines is None and state.observed >= args.baseline:
                state.freeze_baseline()
                print(f"baseline frozen after {state.observed} tokens")
            if state.baselines is not None:
                state.drift_scores()
                for alarm in state.alarms[seen_alarms:]:
                    print(
                        f"ALARM {alarm.channel}: score={alarm.score:.2f} "
                        f"window={alarm.window_value:.4f} baseline={alarm.baseline_value:.4f}"
                    )
                seen_alarms = len(state.alarms)
            if args.interval and state.observed % args.interval == 0:
                means = " ".join(
                    f"{kind}={state.windows[kind].mean:.4f}" for kind in METRIC_KINDS
                )
                print(f"[{state.observed}] {means}")
    finally:
        if stream is not sys.stdin:
            stream.close()
    print(f"done: {state.observed} observed, {skipped} skipped, {len(state.alarms)} alarms")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    backend = None
    if args.backend:
        backend = BackendDescriptor(
            base_url=args.backend, model=args.model, top_k=args.topk, auth_env=args.auth_env
        )
    config = ServiceConfig(
        host=args.host,
        port=args.port,
        capacity=args.capacity,
        backend=backend,
        assets_path=args.assets,
    )
    try:
        uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"cannot start service: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokentropy",
        description="Token-level uncertainty analysis from logit and logprob records.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_backend_flags(p):
        p.add_argument("--backend", help="base URL of a completions-style backend")
        p.add_argument("--model", default="default", help="model name sent to the backend")
        p.add_argument("--topk", type=int, default=20, help="top-k logprobs to request")
        p.add_argument("--auth-env", help="environment variable holding the bearer token")

    p = sub.add_parser("analyze", help="analyze a record file or a prompt")
    p.add_argument("--records", help="line-delimited record file")
    p.add_argument("--logits-buffer", help="binary buffer for logits_ref records")
    p.add_argument("--prompt-file", help="text file to score via the backend")
    p.add_argument("--out", help="report output path (default: stdout)")
    p.add_argument("--label", help="session label (default: input path)")
    add_backend_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reversal", help="compare a text against its word reversal")
    p.add_argument("--prompt-file", required=True, help="text file to score")
    p.add_argument("--out", help="write the comparison report JSON here too")
    add_backend_flags(p)
    p.set_defaults(func=cmd_reversal)

    p = sub.add_parser("monitor", help="stream records through the drift monitor")
    p.add_argument("--records", required=True, help="record file, or - for stdin")
    p.add_argument("--window", type=int, default=512, help="rolling window capacity")
    p.add_argument("--alarm-k", type=float, default=3.0, help="alarm threshold multiplier")
    p.add_argument(
        "--baseline", type=int, default=512, help="freeze the baseline after this many tokens"
    )
    p.add_argument(
        "--interval", type=int, default=100, help="print rolling means every N tokens (0: never)"
    )
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--capacity", type=int, default=64, help="session store capacity")
    p.add_argument("--assets", help="static directory for the web UI bundle")
    add_backend_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
