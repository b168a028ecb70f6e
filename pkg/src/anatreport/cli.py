"""Command-line workflows: synth, train, eval, generate, serve, ablate.

Exit codes: 0 success, 2 usage error (argparse default), 1 runtime failure.
A JSON config file can hold paths and the remote backend settings; explicit
flags always win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compose import PRESETS, RemoteConfig, RemoteLlmClient
from .data import generate_synthetic, load_dataset, save_split
from .data.schema import ClinicalContext
from .evaluate import (
    evaluate_corpus,
    format_detection_table,
    format_headline_table,
    format_key_region_table,
)
from .generator import DecoderConfig
from .metrics import extract_labels
from .pipeline import generate_report
from .training import TrainConfig, load_checkpoint, run_stage, save_checkpoint

# Desk-scale decoder profile; "full" switches to the full-size architecture.
DECODER_PROFILES = {
    "small": dict(layers=2, heads=4, model_dim=128, feedforward_dim=256, max_len=24),
    "full": dict(layers=3, heads=8, model_dim=512, feedforward_dim=2048, max_len=64),
}


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text("utf-8"))


def _remote_client(args, config: dict) -> RemoteLlmClient:
    endpoint = getattr(args, "endpoint", None) or config.get("endpoint")
    model = getattr(args, "model", None) or config.get("model")
    if not endpoint or not model:
        raise SystemExit("remote backend needs --endpoint and --model (or a config file)")
    return RemoteLlmClient(RemoteConfig(endpoint=endpoint, model=model))


def _add_synth(sub):
    p = sub.add_parser("synth", help="generate a synthetic dataset file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--abnormal-rate", type=float, default=0.25)
    p.add_argument("--silent-rate", type=float, default=0.3)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--split", default="train", choices=["train", "validation", "test"])
    p.add_argument("--out", required=True)


def _add_train(sub):
    p = sub.add_parser("train", help="run a training stage")
    p.add_argument("--stage", type=int, required=True, choices=[1, 2, 3])
    p.add_argument("--train", dest="train_path")
    p.add_argument("--val", dest="val_path")
    p.add_argument("--out", help="checkpoint output path")
    p.add_argument("--from-checkpoint", dest="from_checkpoint")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--decoder-lr", type=float, default=3e-4)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ablate-losses", default="",
                   help="comma-separated subset of {L1,L2} to disable")
    p.add_argument("--decoder-profile", default="small", choices=sorted(DECODER_PROFILES))
    p.add_argument("--log", help="write the per-epoch training log here (jsonl)")


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--preset", default="f", choices=sorted(PRESETS))
    p.add_argument("--jitter", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", help="write the machine-readable summary here (json)")


def _add_generate(sub):
    p = sub.add_parser("generate", help="generate one report")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--preset", default="f", choices=sorted(PRESETS))
    p.add_argument("--backend", default="mock", choices=["mock", "remote"])
    p.add_argument("--history")
    p.add_argument("--indication")
    p.add_argument("--reason")
    p.add_argument("--show-document", action="store_true")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--config")


def _add_serve(sub):
    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", action="append", required=True,
                   help="dataset file; repeat for multiple splits")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--config")


def _add_ablate(sub):
    p = sub.add_parser("ablate", help="compare ablation presets end to end")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--presets", default="a,b,c,d,e,f")
    p.add_argument("--limit", type=int, default=20, help="samples per preset")
    p.add_argument("--backend", default="mock", choices=["mock"])
    p.add_argument("--out", help="write the comparison json here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anatreport",
                                     description="anatomy-guided structured report generation")
    sub = parser.add_subparsers(dest="command", required=True)
    for add in (_add_synth, _add_train, _add_eval, _add_generate, _add_serve, _add_ablate):
        add(sub)
    return parser


def _cmd_synth(args) -> int:
    split = generate_synthetic(
        args.n, seed=args.seed, abnormal_rate=args.abnormal_rate,
        silent_rate=args.silent_rate, noise_sigma=args.noise_sigma, name=args.split,
    )
    save_split(split, args.out)
    print(f"wrote {len(split)} samples to {args.out}")
    return 0


def _cmd_train(args) -> int:
    if args.stage == 1:
        _, log = run_stage(TrainConfig(stage=1), None, None)
        print(log.notice)
        return 0
    if not args.train_path or not args.val_path or not args.out:
        raise SystemExit("train stages 2/3 need --train, --val, and --out")
    ablated = {token.strip().upper() for token in args.ablate_losses.split(",") if token.strip()}
    unknown = ablated - {"L1", "L2"}
    if unknown:
        raise SystemExit(f"unknown loss names in --ablate-losses: {sorted(unknown)}")
    config = TrainConfig(
        stage=args.stage, epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.lr, decoder_learning_rate=args.decoder_lr,
        patience=args.patience, seed=args.seed,
        train_l1="L1" not in ablated, train_l2="L2" not in ablated,
    )
    train = load_dataset(args.train_path, name="train")
    val = load_dataset(args.val_path, name="validation")
    state = load_checkpoint(args.from_checkpoint) if args.from_checkpoint else None
    decoder_config = None
    if args.stage == 3:
        decoder_config = DecoderConfig(**DECODER_PROFILES[args.decoder_profile], vocab_size=0)
    state, log = run_stage(config, train, val, state=state, decoder_config=decoder_config)
    save_checkpoint(state, args.out, train_config=config.to_dict())
    if args.log:
        log.save(args.log)
    last = log.epochs[-1]
    print(f"stage {args.stage} done: {len(log.epochs)} epochs, stop={log.stop_reason}, "
          f"val_loss={last.val_loss:.4f}, f1_sentence={last.f1_sentence:.3f}, "
          f"f1_abnormal={last.f1_abnormal:.3f}"
          + (f", token_acc={last.token_accuracy:.3f}" if last.token_accuracy else ""))
    print(f"checkpoint written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    state = load_checkpoint(args.checkpoint)
    split = load_dataset(args.data)
    results = evaluate_corpus(state, split, ablation=args.preset,
                              jitter=args.jitter, detect_seed=args.seed)
    print(format_headline_table(results))
    print()
    print(format_key_region_table(results))
    print()
    print(format_detection_table(results))
    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=2, sort_keys=True), "utf-8")
        print(f"\nsummary written to {args.out}")
    return 0


def _cmd_generate(args) -> int:
    config = _load_config_file(args.config)
    state = load_checkpoint(args.checkpoint)
    split = load_dataset(args.data)
    sample = split.by_id().get(args.sample)
    if sample is None:
        raise SystemExit(f"sample {args.sample!r} not found in {args.data}")
    context_override = None
    if args.history is not None or args.indication is not None or args.reason is not None:
        base = sample.clinical_context
        context_override = ClinicalContext(
            history=args.history if args.history is not None else base.history,
            indication=args.indication if args.indication is not None else base.indication,
            reason_for_exam=args.reason if args.reason is not None else base.reason_for_exam,
        )
    remote_client = _remote_client(args, config) if args.backend == "remote" else None
    result = generate_report(state, sample, ablation=args.preset, backend=args.backend,
                             context_override=context_override, remote_client=remote_client)
    if args.show_document:
        print("=== prompt document ===")
        print(result.document.render())
        print("=== report ===")
    print(result.report.raw_text)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceContext, create_app

    config = _load_config_file(args.config)
    state = load_checkpoint(args.checkpoint)
    splits = {}
    for path in args.data:
        split = load_dataset(path)
        splits[split.name] = split
    remote_config = None
    endpoint = args.endpoint or config.get("endpoint")
    model = args.model or config.get("model")
    if endpoint and model:
        remote_config = RemoteConfig(endpoint=endpoint, model=model)
    app = create_app(ServiceContext(state=state, splits=splits, remote_config=remote_config))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_ablate(args) -> int:
    state = load_checkpoint(args.checkpoint)
    split = load_dataset(args.data)
    samples = split.samples[: args.limit]
    preset_names = [p.strip() for p in args.presets.split(",") if p.strip()]
    unknown = set(preset_names) - set(PRESETS)
    if unknown:
        raise SystemExit(f"unknown presets: {sorted(unknown)}")

    from .metrics import ce_scores, nlg_scores

    rows = {}
    for name in preset_names:
        candidates, references, section_counts, abnormal_counts = [], [], [], []
        for sample in samples:
            result = generate_report(state, sample, ablation=name, backend="mock")
            candidates.append(result.report.raw_text)
            references.append(sample.reference_report)
            section_counts.append(len(result.report.sections))
            abnormal_counts.append(sum(s.abnormal for s in result.report.sections))
        nlg = nlg_scores(candidates, references)
        ce = ce_scores([extract_labels(c) for c in candidates],
                       [extract_labels(r) for r in references])
        rows[name] = {
            "ablation": PRESETS[name].to_dict(),
            "mean_sections": sum(section_counts) / len(section_counts),
            "mean_abnormal_sections": sum(abnormal_counts) / len(abnormal_counts),
            "nlg_mean": nlg.mean_nlg(),
            "nlg": nlg.to_dict(),
            "ce_micro": ce["micro"],
        }

    header = (f"{'Model':<6} {'L1':<3} {'L2':<3} {'P1':<3} {'P2':<3} {'P3':<3} {'C':<3} "
              f"{'Sections':>9} {'NLG':>7} {'CE-F1':>7} {'CE-P':>7} {'CE-R':>7}")
    print(header)
    for name in preset_names:
        row = rows[name]
        flags = row["ablation"]
        marks = ["x" if flags[k] else "." for k in ("l1", "l2", "p1", "p2", "p3", "c")]
        print(f"({name})   {marks[0]:<3} {marks[1]:<3} {marks[2]:<3} {marks[3]:<3} "
              f"{marks[4]:<3} {marks[5]:<3} {row['mean_sections']:>9.1f} "
              f"{row['nlg_mean']:>7.3f} {row['ce_micro']['f1']:>7.3f} "
              f"{row['ce_micro']['precision']:>7.3f} {row['ce_micro']['recall']:>7.3f}")
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True), "utf-8")
        print(f"comparison written to {args.out}")
    return 0


COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "generate": _cmd_generate,
    "serve": _cmd_serve,
    "ablate": _cmd_ablate,
}


def cli_run(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SystemExit:
        raise
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_run(sys.argv[1:]))


if __name__ == "__main__":
    main()
