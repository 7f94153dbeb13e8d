"""Command-line entry point.

Subcommands run pipeline stages standalone (mfcc, align, assess), train
the similarity model, or launch the HTTP service. Exit codes: 0 success,
1 domain error (message on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from . import CANONICAL_RATE, __version__
from .audio import load_wav, normalize_peak, resample
from .errors import HangulCoachError
from .hangul import Flag, align, highlight
from .mfcc import MfccConfig, fit_frames, mfcc
from .siamese import (
    INPUT_FRAMES,
    PairExample,
    TrainConfig,
    init_model,
    load_model,
    save_model,
    similarity,
    train,
)
from .stt import SttConfig, make_transcriber

RED, RESET = "\x1b[31m", "\x1b[0m"


class _Stage(Exception):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, err: Exception):
        super().__init__(f"{stage}: {type(err).__name__}: {err}")


def _canonical_clip(path: str):
    clip = load_wav(Path(path).read_bytes())
    return normalize_peak(resample(clip, CANONICAL_RATE))


def _load_mfcc_config(path: str | None) -> MfccConfig:
    if path is None:
        return MfccConfig()
    overrides = json.loads(Path(path).read_text(encoding="utf-8"))
    return MfccConfig(**overrides)


def cmd_mfcc(args) -> int:
    config = _load_mfcc_config(args.config)
    matrix = mfcc(_canonical_clip(args.wav), config)
    frames, coeffs = matrix.values.shape
    lines = [f"# frames={frames} coeffs={coeffs} hop_s={matrix.frame_hop_seconds:g}"]
    lines += [",".join(str(float(v)) for v in row) for row in matrix.values]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _render_spans(spans) -> str:
    return "".join(
        s.text if s.flag is Flag.OK else f"{RED}{s.text}{RESET}" for s in spans
    )


def cmd_align(args) -> int:
    script = align(args.reference, args.hypothesis)
    diff = highlight(script, args.reference, args.hypothesis)
    if args.json:
        print(json.dumps(diff.to_dict(), ensure_ascii=False, separators=(",", ":")))
    else:
        print(f"reference:  {_render_spans(diff.reference_spans)}")
        print(f"hypothesis: {_render_spans(diff.hypothesis_spans)}")
        print(f"total_cost: {script.total_cost:g}")
    return 0


def cmd_assess(args) -> int:
    from .corpus import load_catalog
    from .scoring import level_of

    try:
        catalog = load_catalog(args.corpus)
    except Exception as err:
        raise _Stage("corpus", err)
    entry = catalog.get(args.sentence_id)
    if entry is None:
        raise _Stage("corpus", KeyError(f"unknown sentence_id {args.sentence_id!r}"))

    try:
        model = load_model(args.model)
    except Exception as err:
        raise _Stage("model", err)

    try:
        clip = _canonical_clip(args.wav)
    except Exception as err:
        raise _Stage("audio", err)

    try:
        transcriber = make_transcriber(
            SttConfig(backend=args.stt, mock_table_path=args.mock_table)
        )
        transcript = transcriber(clip)
    except Exception as err:
        raise _Stage("stt", err)

    try:
        script = align(entry.text, transcript.text)
        diff = highlight(script, entry.text, transcript.text)
    except Exception as err:
        raise _Stage("align", err)

    try:
        features = fit_frames(mfcc(clip), INPUT_FRAMES)
        score = similarity(model, features, entry.answer_mfcc)
    except Exception as err:
        raise _Stage("similarity", err)

    print(f"transcript: {transcript.text}")
    print(f"reference:  {entry.text}")
    print(f"diff ref:   {_render_spans(diff.reference_spans)}")
    print(f"diff hyp:   {_render_spans(diff.hypothesis_spans)}")
    print(f"similarity: {score:.4f}")
    print(f"level:      {level_of(score).value}")
    return 0


def cmd_train(args) -> int:
    data_dir = Path(args.data)
    manifest_path = data_dir / "pairs.json"
    if not manifest_path.is_file():
        raise _Stage("data", FileNotFoundError(f"no pairs.json in {data_dir}"))
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    cache: dict[str, object] = {}

    def features(name: str):
        if name not in cache:
            try:
                clip = _canonical_clip(str(data_dir / name))
            except Exception as err:
                raise _Stage("data", err)
            cache[name] = fit_frames(mfcc(clip), INPUT_FRAMES)
        return cache[name]

    pairs = [
        PairExample(features(item["a"]), features(item["b"]), item["label"])
        for item in manifest
    ]
    model = init_model(args.seed)
    config = TrainConfig(epochs=args.epochs, seed=args.seed)
    if args.epochs > 0:
        model, history = train(model, pairs, config)
        for i, loss in enumerate(history):
            print(f"epoch {i + 1}/{args.epochs} loss {loss:.6f}")
    save_model(model, args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_file(args.config)
    app = create_app(config)  # loads model/corpus/table before binding

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((config.host, config.port))
        sock.listen(128)
    except OSError as err:
        sock.close()
        print(f"serve: cannot bind {config.host}:{config.port}: {err}", file=sys.stderr)
        return 1
    server = uvicorn.Server(
        uvicorn.Config(app, host=config.host, port=config.port, log_level="info")
    )
    try:
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        pass  # uvicorn replays the captured SIGINT after graceful shutdown
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hangul-coach")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mfcc", help="dump MFCC features of a WAV as CSV")
    p.add_argument("wav")
    p.add_argument("--config", help="JSON file with MfccConfig overrides")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_mfcc)

    p = sub.add_parser("align", help="highlight differences between two sentences")
    p.add_argument("reference")
    p.add_argument("hypothesis")
    p.add_argument("--json", action="store_true", help="emit the span structure")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("assess", help="full assessment of one recording")
    p.add_argument("wav")
    p.add_argument("--sentence-id", required=True)
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--stt", choices=("mock", "google"), default="mock")
    p.add_argument("--mock-table", help="mock fingerprint table (mock backend)")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("train", help="train the similarity model")
    p.add_argument("--data", required=True, help="directory with pairs.json + WAVs")
    p.add_argument("--epochs", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True, help="service config JSON")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Stage as err:
        print(str(err), file=sys.stderr)
        return 1
    except (HangulCoachError, OSError, ValueError, KeyError, json.JSONDecodeError) as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
