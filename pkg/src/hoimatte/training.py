"""Five-stage curriculum: pretrain, sup1, sup2, cl_selfsup, refine.

Each stage reads its predecessor's checkpoint from ``run_dir/checkpoints``,
trains the parts it owns, and writes ``<key>.ckpt`` after every epoch so an
interrupted stage can resume. Batch order and compositing backgrounds are
drawn from generators keyed by (seed, stage, epoch), so resuming replays
exactly what an uninterrupted run would have done.
"""
import csv
import dataclasses
import hashlib
import json
import logging
from pathlib import Path

import numpy as np
import torch
from filelock import FileLock, Timeout

from . import corpus as corpus_mod
from .complementary import cl_loss_terms, cl_training_loss
from .config import STAGES, Config, ConfigError, StageConfig, stage_config
from .containers import load_arrays, save_arrays
from .losses import alpha_loss, discriminator_loss, generator_loss_stage1, generator_loss_stage2
from .metrics import evaluate_matte
from .networks import MattingSystem, build_system
from .refine import merge_patches, refine_patches, select_topk_patches

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 1
PIPELINES = ("S", "D", "S+RN", "D+RN")
PREDECESSOR = {"sup1": "pretrain", "sup2": "sup1", "cl_selfsup": "sup2", "refine": "sup2"}
_OPTIMIZED = {
    "pretrain": ("fp1", "fp2"),
    "sup1": ("fp1", "fp2", "disc1", "disc2"),
    "sup2": ("fp1", "fp2", "disc1", "disc2", "cl"),
    "cl_selfsup": ("fp1", "fp2", "disc1", "disc2"),
    "refine": ("rn",),
}


class StageOrderError(RuntimeError):
    pass


class RunLockedError(RuntimeError):
    pass


def set_deterministic(single_job=True):
    torch.use_deterministic_algorithms(True)
    if single_job:
        torch.set_num_threads(1)


def stage_key(stage, ablation="full"):
    return f"cl_selfsup-{ablation}" if stage == "cl_selfsup" else stage


# --------------------------------------------------------------------------
# parameter groups and checkpoints


def module_for(system, name):
    return {
        "fp1": system.fp[0],
        "fp2": system.fp[1],
        "disc1": system.disc[0],
        "disc2": system.disc[1],
        "cl": system.cl,
        "rn": system.rn,
    }[name]


def make_optimizers(system, stage, lr):
    return {
        name: torch.optim.Adam(module_for(system, name).parameters(), lr=lr)
        for name in _OPTIMIZED[stage]
    }


def system_arrays(system):
    return {"param." + k: v.detach().cpu().numpy().copy() for k, v in system.state_dict().items()}


def group_checksum(system, names):
    h = hashlib.sha256()
    for name in names:
        for k, v in module_for(system, name).state_dict().items():
            h.update(k.encode())
            h.update(v.detach().cpu().numpy().tobytes())
    return h.hexdigest()


def _optimizer_arrays(system, optimizers):
    arrays = {}
    for oname, opt in optimizers.items():
        names = {id(p): n for n, p in module_for(system, oname).named_parameters()}
        for p, st in opt.state.items():
            base = f"opt.{oname}.{names[id(p)]}"
            arrays[base + ".exp_avg"] = st["exp_avg"].detach().numpy().copy()
            arrays[base + ".exp_avg_sq"] = st["exp_avg_sq"].detach().numpy().copy()
            arrays[base + ".step"] = np.asarray(float(st["step"]))
    return arrays


def _restore_optimizers(system, optimizers, arrays):
    for oname, opt in optimizers.items():
        for pname, p in module_for(system, oname).named_parameters():
            base = f"opt.{oname}.{pname}"
            if base + ".exp_avg" not in arrays:
                continue
            opt.state[p] = {
                "step": torch.tensor(float(arrays[base + ".step"].item())),
                "exp_avg": torch.from_numpy(arrays[base + ".exp_avg"].copy()),
                "exp_avg_sq": torch.from_numpy(arrays[base + ".exp_avg_sq"].copy()),
            }


def save_checkpoint(path, system, state, optimizers=None):
    arrays = system_arrays(system)
    if optimizers:
        arrays.update(_optimizer_arrays(system, optimizers))
    state = {**state, "format": CHECKPOINT_FORMAT}
    tmp = Path(str(path) + ".tmp")
    save_arrays(tmp, arrays, state)
    tmp.replace(path)


def load_checkpoint(path, model=None):
    """Return ``(system, state, arrays)``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    arrays, state = load_arrays(path)
    if state is None or state.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: unsupported checkpoint format")
    if model is None:
        model = Config().model
        if "model" in state:
            model = dataclasses.replace(model, **{k: tuple(v) for k, v in state["model"].items()})
    system = MattingSystem(model)
    sd = {k[len("param."):]: torch.from_numpy(v.copy()) for k, v in arrays.items() if k.startswith("param.")}
    system.load_state_dict(sd)
    return system, state, arrays


# --------------------------------------------------------------------------
# data plumbing


def _chw(x):
    t = torch.from_numpy(np.ascontiguousarray(x))
    return t.permute(0, 3, 1, 2) if t.dim() == 4 else t[:, None]


def _inputs(data, idx):
    return {
        "rgb": _chw(data.rgb[idx]),
        "depth": _chw(data.depth[idx]),
        "seg": _chw(data.seg[idx]),
        "heatmap": _chw(data.heatmap[idx]),
    }


def _labels(data, idx):
    return {"alpha": _chw(data.alpha[idx]), "fg": _chw(data.fg[idx]), "bg": _chw(data.bg[idx])}


def _epoch_rng(seed, stage, epoch):
    return np.random.default_rng([int(seed), STAGES.index(stage), int(epoch)])


def _batches(n, batch_size, rng):
    order = rng.permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def _predict(system, m, x):
    return system.predict(m, x["rgb"], x["depth"], x["seg"], x["heatmap"])


class _Meter:
    def __init__(self):
        self.sums = {}
        self.counts = {}

    def add(self, **values):
        for k, v in values.items():
            self.sums[k] = self.sums.get(k, 0.0) + float(v)
            self.counts[k] = self.counts.get(k, 0) + 1

    def means(self):
        return {k: self.sums[k] / self.counts[k] for k in sorted(self.sums)}


# --------------------------------------------------------------------------
# per-epoch steps


def _set_modes(system, stage):
    system.eval()
    for name in _OPTIMIZED[stage]:
        module_for(system, name).train()


def _epoch_pretrain(system, opts, data, scfg, epoch, ctx):
    meter = _Meter()
    for idx in _batches(len(data), scfg.batch_size, _epoch_rng(scfg.seed, scfg.stage, epoch)):
        x, y = _inputs(data, idx), _labels(data, idx)
        for m in (1, 2):
            loss = alpha_loss(_predict(system, m, x), y["alpha"])
            opts[f"fp{m}"].zero_grad()
            loss.backward()
            opts[f"fp{m}"].step()
            meter.add(**{f"l_a{m}": loss.item()})
    return meter.means()


def _epoch_supervised(system, opts, data, scfg, epoch, ctx):
    meter = _Meter()
    pool = ctx["bbar"]
    rng = _epoch_rng(scfg.seed, scfg.stage, epoch)
    train_cl = scfg.stage == "sup2"
    for idx in _batches(len(data), scfg.batch_size, rng):
        x, y = _inputs(data, idx), _labels(data, idx)
        bbar = _chw(pool[rng.integers(len(pool), size=len(idx))])
        cl_total = 0.0
        for m in (1, 2):
            disc = system.disc[m - 1]
            a = _predict(system, m, x)
            g = generator_loss_stage1(
                a, y["fg"], y["bg"], x["rgb"], bbar, disc, y["alpha"], scfg.lambda_a, scfg.lambda_com
            )
            opts[f"fp{m}"].zero_grad()
            g.backward()
            opts[f"fp{m}"].step()

            a = a.detach()
            d = discriminator_loss(disc, a, y["fg"], bbar, x["rgb"])
            opts[f"disc{m}"].zero_grad()
            d.backward()
            opts[f"disc{m}"].step()
            meter.add(**{f"g{m}": g.item(), f"d{m}": d.item(), f"l_a{m}": alpha_loss(a, y["alpha"]).item()})

            if train_cl:
                pred = system.cl(m, x["rgb"], a)
                lc = cl_training_loss(pred, (a - y["alpha"]).abs())
                cl_total = cl_total + lc
                meter.add(**{f"l_c{m}": lc.item()})
        if train_cl:
            opts["cl"].zero_grad()
            cl_total.backward()
            opts["cl"].step()
    return meter.means()


def _epoch_cl_selfsup(system, opts, data, scfg, epoch, ctx):
    meter = _Meter()
    pool = ctx["bbar"]
    rng = _epoch_rng(scfg.seed, scfg.stage, epoch)
    lam_cs, lam_dc = scfg.effective_lambda_cs, scfg.effective_lambda_dc
    for idx in _batches(len(data), scfg.batch_size, rng):
        x = _inputs(data, idx)
        rgb = x["rgb"]
        bbar = _chw(pool[rng.integers(len(pool), size=len(idx))])
        a1, a2 = _predict(system, 1, x), _predict(system, 2, x)
        c1, c2 = system.cl(1, rgb, a1), system.cl(2, rgb, a2)
        total = 0.0
        for m, a in ((1, a1), (2, a2)):
            l_cs, l_dc = cl_loss_terms(a1, a2, c1, c2, m, scfg.tau)
            l_cl = lam_cs * l_cs + lam_dc * l_dc
            total = total + generator_loss_stage2(a, rgb, bbar, system.disc[m - 1], l_cl, scfg.lambda_cl)
            meter.add(**{f"l_cs{m}": l_cs.item(), f"l_dc{m}": l_dc.item(), f"l_dc_weighted{m}": lam_dc * l_dc.item()})
            if scfg.lambda_anchor > 0:
                with torch.no_grad():
                    a0 = _predict(ctx["anchor"], m, x)
                l_anchor = (a - a0).abs().mean()
                total = total + scfg.lambda_anchor * l_anchor
                meter.add(**{f"l_anchor{m}": l_anchor.item()})
        opts["fp1"].zero_grad()
        opts["fp2"].zero_grad()
        total.backward()
        opts["fp1"].step()
        opts["fp2"].step()
        for m, a in ((1, a1), (2, a2)):
            # input image stands in for the unknown foreground
            d = discriminator_loss(system.disc[m - 1], a.detach(), rgb, bbar, rgb)
            opts[f"disc{m}"].zero_grad()
            d.backward()
            opts[f"disc{m}"].step()
            meter.add(**{f"d{m}": d.item()})
        meter.add(g=total.item())
    return meter.means()


def gather_patches(system, x, alpha_np, k):
    """Select top-k windows per image and branch from the deviation maps.

    Returns ``(patches_alpha, patches_rgb, targets)`` stacked over all images
    and both branches; ``targets`` is None when ``alpha_np`` is None.
    """
    rgb_hwc = x["rgb"].permute(0, 2, 3, 1).numpy()
    pa, pr, pt = [], [], []
    with torch.no_grad():
        for m in (1, 2):
            a = _predict(system, m, x)
            dev = system.cl(m, x["rgb"], a)
            a_np, dev_np = a[:, 0].numpy(), dev[:, 0].numpy()
            for i in range(len(a_np)):
                ps = select_topk_patches(dev_np[i], a_np[i], rgb_hwc[i], k)
                pa.append(ps.patches_alpha)
                pr.append(ps.patches_rgb)
                if alpha_np is not None:
                    s = ps.patch_size
                    pt.extend(alpha_np[i, r:r + s, c:c + s] for r, c in ps.windows)
    pa = np.concatenate(pa)
    pr = np.concatenate(pr)
    targets = np.stack(pt) if pt else None
    return pa, pr, targets


def _epoch_refine(system, opts, data, scfg, epoch, ctx):
    meter = _Meter()
    if scfg.top_k == 0:
        return {"l_a_patch": 0.0}
    for idx in _batches(len(data), scfg.batch_size, _epoch_rng(scfg.seed, scfg.stage, epoch)):
        x = _inputs(data, idx)
        pa, pr, targets = gather_patches(system, x, data.alpha[idx], scfg.top_k)
        if len(pa) == 0:
            continue
        a = torch.from_numpy(pa)[:, None]
        rgb = torch.from_numpy(pr).permute(0, 3, 1, 2)
        loss = alpha_loss(system.rn(a, rgb), torch.from_numpy(targets)[:, None])
        opts["rn"].zero_grad()
        loss.backward()
        opts["rn"].step()
        meter.add(l_a_patch=loss.item())
    return meter.means()


_EPOCH_FN = {
    "pretrain": _epoch_pretrain,
    "sup1": _epoch_supervised,
    "sup2": _epoch_supervised,
    "cl_selfsup": _epoch_cl_selfsup,
    "refine": _epoch_refine,
}
_SPLIT_FOR = {
    "pretrain": "pretrain",
    "sup1": "labeled-train",
    "sup2": "labeled-train",
    "cl_selfsup": "unlabeled-train",
    "refine": "labeled-train",
}


# --------------------------------------------------------------------------
# manifest


def manifest_path(run_dir):
    return Path(run_dir) / "manifest.json"


def read_run_manifest(run_dir):
    p = manifest_path(run_dir)
    if not p.is_file():
        return {"format": 1, "stages": {}}
    with open(p) as fh:
        return json.load(fh)


def _write_run_manifest(run_dir, manifest):
    with open(manifest_path(run_dir), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)


def _write_csv(path, rows):
    keys = sorted({k for r in rows for k in r})
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


# --------------------------------------------------------------------------
# stage runner


def _resolve_source(run_dir, stage, source):
    ck = Path(run_dir) / "checkpoints"
    if source is not None:
        return Path(source)
    if stage == "refine" and (ck / "cl_selfsup-full.ckpt").is_file():
        return ck / "cl_selfsup-full.ckpt"
    return ck / f"{PREDECESSOR[stage]}.ckpt"


def _check_history(stage, state, path):
    history = state.get("history", [])
    need = PREDECESSOR[stage]
    if need not in history:
        raise StageOrderError(
            f"stage {stage!r} requires a checkpoint that completed {need!r}; "
            f"{path} has history {history}"
        )
    if not state.get("finished", False):
        raise StageOrderError(f"{path} is an unfinished {state.get('key')!r} checkpoint")


def run_stage(cfg, stage, run_dir, corpus_dir, ablation=None, resume=False, source=None,
              single_job=True):
    """Run one stage and return the path of its checkpoint."""
    if stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}; expected one of {STAGES}")
    run_dir = Path(run_dir)
    (run_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    (run_dir / "logs").mkdir(exist_ok=True)
    lock = FileLock(str(run_dir / ".lock"))
    try:
        lock.acquire(timeout=0)
    except Timeout as exc:
        raise RunLockedError(f"another training job holds {run_dir / '.lock'}") from exc
    try:
        return _run_stage_locked(cfg, stage, run_dir, corpus_dir, ablation, resume, source, single_job)
    finally:
        lock.release()


def _run_stage_locked(cfg, stage, run_dir, corpus_dir, ablation, resume, source, single_job):
    set_deterministic(single_job)
    scfg = stage_config(cfg, stage)
    if ablation is not None:
        scfg = dataclasses.replace(scfg, ablation=ablation)
    if stage != "cl_selfsup":
        # ablations only shape the self-supervised stage
        scfg = dataclasses.replace(scfg, ablation="full")
    key = stage_key(stage, scfg.ablation)
    out_path = run_dir / "checkpoints" / f"{key}.ckpt"

    corpus_manifest = corpus_mod.read_manifest(corpus_dir)
    data = corpus_mod.load_split(corpus_dir, _SPLIT_FOR[stage])
    if stage == "cl_selfsup":
        data = data.unlabeled()

    opt_arrays = None
    start = 0
    prior_losses = []
    src_path = None
    if resume and out_path.is_file():
        system, state, opt_arrays = load_checkpoint(out_path, cfg.model)
        if state["epoch"] >= scfg.epochs:
            log.info("%s already at epoch %d; nothing to resume", key, state["epoch"])
            return out_path
        start = state["epoch"]
        history = [h for h in state["history"] if h != key]
        src = state["source"]
        prior_losses = state.get("losses", [])
    elif stage == "pretrain":
        system = build_system(cfg.model, cfg.seed)
        history, src = [], None
    else:
        src_path = _resolve_source(run_dir, stage, source)
        if not src_path.is_file():
            raise FileNotFoundError(
                f"stage {stage!r} needs a {PREDECESSOR[stage]!r} checkpoint; not found: {src_path}"
            )
        system, state, _ = load_checkpoint(src_path, cfg.model)
        _check_history(stage, state, src_path)
        history, src = list(state["history"]), src_path.name

    opts = make_optimizers(system, stage, scfg.lr)
    if opt_arrays is not None:
        _restore_optimizers(system, opts, opt_arrays)
    for p in system.parameters():
        p.requires_grad_(False)
    for name in _OPTIMIZED[stage]:
        for p in module_for(system, name).parameters():
            p.requires_grad_(True)

    ctx = {}
    if stage in ("sup1", "sup2", "cl_selfsup"):
        ctx["bbar"] = corpus_mod.background_pool(
            cfg.seed, scfg.bbar_pool, cfg.synth.size
        )
    if stage == "cl_selfsup" and scfg.lambda_anchor > 0:
        # frozen stage-entry weights, also on resume
        entry = src_path
        if entry is None:
            entry = _resolve_source(run_dir, stage, source) if source is not None else run_dir / "checkpoints" / src
        if not entry.is_file():
            raise FileNotFoundError(f"stage-entry checkpoint for the anchor not found: {entry}")
        ctx["anchor"] = load_checkpoint(entry, cfg.model)[0].eval()

    frozen = [n for n in ("fp1", "fp2", "disc1", "disc2", "cl", "rn") if n not in _OPTIMIZED[stage]]
    frozen_before = group_checksum(system, frozen)

    def state_for(epoch, losses, finished):
        return {
            "stage": stage,
            "key": key,
            "epoch": epoch,
            "epochs": scfg.epochs,
            "finished": finished,
            "history": history + ([key] if finished else []),
            "source": src,
            "stage_config": dataclasses.asdict(scfg),
            "model": {k: list(v) for k, v in dataclasses.asdict(cfg.model).items()},
            "losses": losses,
        }

    losses = list(prior_losses)
    epoch_fn = _EPOCH_FN[stage]
    for epoch in range(start, scfg.epochs):
        _set_modes(system, stage)
        row = {"epoch": epoch + 1, **epoch_fn(system, opts, data, scfg, epoch, ctx)}
        losses.append(row)
        log.info("%s epoch %d: %s", key, epoch + 1, row)
        save_checkpoint(out_path, system, state_for(epoch + 1, losses, False), opts)

    if group_checksum(system, frozen) != frozen_before:
        raise AssertionError(f"frozen parameters changed during {key}")
    system.eval()
    save_checkpoint(out_path, system, state_for(scfg.epochs, losses, True), opts)
    _write_csv(run_dir / "logs" / f"{key}.csv", losses)

    manifest = read_run_manifest(run_dir)
    manifest["config"] = cfg.to_dict()
    manifest["corpus"] = {
        "checksums": {k: v["checksum"] for k, v in corpus_manifest["splits"].items()},
    }
    manifest["stages"][key] = {
        "stage": stage,
        "ablation": scfg.ablation,
        "source": src,
        "checkpoint": str(out_path.relative_to(run_dir)),
        "epochs": scfg.epochs,
        "effective_lambda_cs": scfg.effective_lambda_cs,
        "effective_lambda_dc": scfg.effective_lambda_dc,
        "history": history + [key],
        "losses": losses,
        "frozen_checksum": frozen_before,
    }
    _write_run_manifest(run_dir, manifest)
    return out_path


def run_pretrain(cfg, run_dir, corpus_dir, **kw):
    return run_stage(cfg, "pretrain", run_dir, corpus_dir, **kw)


def run_supervised(cfg, run_dir, corpus_dir, **kw):
    """sup1 followed by sup2; returns the sup2 checkpoint."""
    run_stage(cfg, "sup1", run_dir, corpus_dir, **kw)
    return run_stage(cfg, "sup2", run_dir, corpus_dir, **kw)


def run_cl_selfsup(cfg, run_dir, corpus_dir, ablation=None, **kw):
    return run_stage(cfg, "cl_selfsup", run_dir, corpus_dir, ablation=ablation, **kw)


def run_refine(cfg, run_dir, corpus_dir, **kw):
    return run_stage(cfg, "refine", run_dir, corpus_dir, **kw)


# --------------------------------------------------------------------------
# inference and evaluation


def infer(system, data, pipeline="S", top_k=4, chunk=16):
    """Mattes (N, H, W) for the inputs of ``data`` under ``pipeline``.

    Returns ``(mattes, centers)``; ``centers`` lists the refined patch
    centres per image (empty without refinement).
    """
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    branch = 1 if pipeline.startswith("S") else 2
    refine = pipeline.endswith("+RN")
    system.eval()
    mattes, centers = [], []
    n = len(data.rgb)
    with torch.no_grad():
        for start in range(0, n, chunk):
            idx = np.arange(start, min(n, start + chunk))
            x = _inputs(data, idx)
            a = _predict(system, branch, x)
            a_np = a[:, 0].numpy()
            if not refine:
                mattes.append(a_np)
                centers.extend([] for _ in idx)
                continue
            dev = system.cl(branch, x["rgb"], a)[:, 0].numpy()
            rgb_hwc = data.rgb[idx]
            for i in range(len(idx)):
                ps = select_topk_patches(dev[i], a_np[i], rgb_hwc[i], top_k)
                refined = refine_patches(system.rn, ps)
                a_np[i] = merge_patches(a_np[i], ps, refined)
                centers.append([list(c) for c in ps.centers])
            mattes.append(a_np)
    return (np.concatenate(mattes) if mattes else np.zeros((0,))), centers


def run_inference(checkpoint, data, pipeline="S", top_k=4):
    system, _, _ = load_checkpoint(checkpoint)
    return infer(system, data, pipeline, top_k)[0]


def summarize(rows):
    keys = [k for k in rows[0]["metrics"]] if rows else []
    return {k: float(np.mean([r["metrics"][k] for r in rows])) for k in keys}


def evaluate_mattes(mattes, data, centers=None):
    rows = []
    for i in range(len(mattes)):
        rep = evaluate_matte(mattes[i], data.alpha[i], data.human_mask[i], data.object_mask[i])
        row = {
            "index": i,
            "seed": data.seeds[i],
            "interactive": bool(data.object_mask[i].any()),
            "metrics": rep.to_dict(),
        }
        if centers is not None:
            row["patch_centers"] = centers[i]
        rows.append(row)
    return {"count": len(rows), "overall": summarize(rows), "samples": rows}


def evaluate_split(system, data, pipeline="S", top_k=4):
    mattes, centers = infer(system, data, pipeline, top_k)
    report = evaluate_mattes(mattes, data, centers)
    report["pipeline"] = pipeline
    report["split"] = data.name
    return report


def cl_eval_loss(system, data, cl=None, chunk=16):
    """Mean L_c over both branches of ``system`` on a labeled split.

    ``cl`` substitutes a different deviation estimator for the system's own.
    """
    cl = cl if cl is not None else system.cl
    system.eval()
    cl.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(data), chunk):
            idx = np.arange(start, min(len(data), start + chunk))
            x, y = _inputs(data, idx), _labels(data, idx)
            for m in (1, 2):
                a = _predict(system, m, x)
                total += cl_training_loss(cl(m, x["rgb"], a), (a - y["alpha"]).abs()).item() * len(idx)
                count += len(idx)
    return total / count


def write_report(report, json_path, csv_path=None):
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    if csv_path is not None:
        rows = [
            {"index": r["index"], "seed": r["seed"], "interactive": r["interactive"], **r["metrics"]}
            for r in report["samples"]
        ]
        _write_csv(csv_path, rows)
