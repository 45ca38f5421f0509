"""Command-line interface: segment, train, recognize, compile, serve, synth.

Exit codes: 0 success, 1 domain error (bad bundle, wrong phase, failed
compile, ...), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .recognition import (
    RecognitionError,
    TaskSentenceClassifier,
    load_corpus,
    train,
)
from .segmentation import SegmentationError, save_diagnostics
from .session import (
    SessionError,
    CompileFailure,
    load_bundle,
    load_session,
    _segment_bundle,
    SessionConfig,
)
from .skillparams import SkillParamsError
from .synthgen import SCENARIO_NAMES, SynthError, gen_scenario
from .taskmodel import TaskModelError

_DOMAIN_ERRORS = (
    SessionError,
    SegmentationError,
    RecognitionError,
    SkillParamsError,
    TaskModelError,
    SynthError,
    OSError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stopgo",
        description="Encode stop-and-go multimodal demonstrations into robot task models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a demonstration bundle and print the segment table")
    p.add_argument("bundle", help="bundle directory")
    p.add_argument("--diagnostics", metavar="OUT.CSV", help="write the signal-chain diagnostics CSV")

    p = sub.add_parser("train", help="train the instruction classifier from a label,sentence CSV")
    p.add_argument("corpus", help="corpus CSV path")
    p.add_argument("model_out", help="where to write the model file")

    p = sub.add_parser("recognize", help="classify one instruction sentence")
    p.add_argument("model", help="trained model file")
    p.add_argument("text", help="instruction sentence")

    p = sub.add_parser("compile", help="compile a session directory into a task model")
    p.add_argument("session_dir", help="session directory (data dir / session id)")

    p = sub.add_parser("serve", help="run the review HTTP service")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--data", default=os.environ.get("STOPGO_DATA", "./stopgo-data"),
                   help="session data directory (or set STOPGO_DATA)")
    p.add_argument("--ui", default=None, help="directory of built review-UI static files")

    p = sub.add_parser("synth", help="generate a synthetic demonstration bundle")
    p.add_argument("scenario", choices=sorted(SCENARIO_NAMES))
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_segment(args) -> int:
    bundle = load_bundle(args.bundle)
    diag, segments = _segment_bundle(bundle, SessionConfig())
    if args.diagnostics:
        save_diagnostics(args.diagnostics, diag)
    print(f"bundle {bundle.bundle_id}: {bundle.frame_count} frames, "
          f"{len(diag.stops)} stops, {len(segments)} segments")
    print(f"{'seg':>4} {'start':>7} {'end':>7} {'seconds':>8}")
    for i, seg in enumerate(segments):
        print(f"{i:>4} {seg.start:>7} {seg.end:>7} {(seg.end - seg.start) / bundle.video_rate:>8.2f}")
    return 0


def _cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    model = train(corpus)
    model.save(args.model_out)
    print(f"trained on {len(corpus)} sentences, {len(model.classes_)} classes, "
          f"{len(model.vocabulary_)} tokens -> {args.model_out}")
    return 0


def _cmd_recognize(args) -> int:
    model = TaskSentenceClassifier.load(args.model)
    prediction = model.predict(args.text)
    print(f"{prediction.label.code} ({prediction.label.human_name})")
    ranked = sorted(prediction.scores.items(), key=lambda kv: -kv[1])
    for label, score in ranked:
        print(f"  {label.code:<8} {score:.4f}")
    return 0


def _cmd_compile(args) -> int:
    session_dir = Path(args.session_dir)
    session = load_session(session_dir.parent, session_dir.name)
    try:
        session.compile()
    except CompileFailure as exc:
        print(f"compile failed: {exc}", file=sys.stderr)
        for violation in exc.violations:
            print(f"  {violation}", file=sys.stderr)
        return 1
    out = session.directory / "taskmodel.txt"
    print(out)
    return 0


def _cmd_serve(args) -> int:
    from .server import serve_forever

    serve_forever(args.port, args.data, args.ui)
    return 0


def _cmd_synth(args) -> int:
    out = gen_scenario(args.scenario, args.out_dir, seed=args.seed)
    print(out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "segment": _cmd_segment,
        "train": _cmd_train,
        "recognize": _cmd_recognize,
        "compile": _cmd_compile,
        "serve": _cmd_serve,
        "synth": _cmd_synth,
    }[args.command]
    try:
        return handler(args)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
