"""Desk-scale curriculum: corpus, every stage, the ablations and evaluation.

``run_desk_curriculum`` is what the acceptance suite and the curriculum demo
run; it returns a flat dictionary of the numbers they check.
"""
import json
import logging
import time
from pathlib import Path

from . import training as T
from .config import ABLATIONS, Config, desk_preset
from .corpus import load_split, write_corpus
from .networks import build_system

log = logging.getLogger(__name__)

DESK_SIZES = {
    "pretrain": 100,
    "labeled-train": 200,
    "labeled-test": 50,
    "unlabeled-train": 400,
    "unlabeled-test": 50,
}


def _sizes(cfg):
    s = cfg.splits
    return {
        "pretrain": s.pretrain,
        "labeled-train": s.labeled_train,
        "labeled-test": s.labeled_test,
        "unlabeled-train": s.unlabeled_train,
        "unlabeled-test": s.unlabeled_test,
    }


def run_desk_curriculum(workdir, cfg=None, ablations=ABLATIONS):
    """Synthesize, train every stage, evaluate; returns a results dict."""
    cfg = cfg or desk_preset(Config())
    workdir = Path(workdir)
    corpus_dir = workdir / "corpus"
    run_dir = workdir / "run"
    t0 = time.time()
    write_corpus(corpus_dir, _sizes(cfg), seed=cfg.seed, synth=cfg.synth, force=True)
    test = load_split(corpus_dir, "labeled-test")
    utest = load_split(corpus_dir, "unlabeled-test")
    k = cfg.train.top_k

    def ev(system, data, pipeline):
        return T.evaluate_split(system, data, pipeline, k)

    res = {}
    init = build_system(cfg.model, cfg.seed)
    res["init_sad_S"] = ev(init, test, "S")["overall"]["sad"]
    res["init_sad_D"] = ev(init, test, "D")["overall"]["sad"]

    T.run_stage(cfg, "pretrain", run_dir, corpus_dir)
    T.run_stage(cfg, "sup1", run_dir, corpus_dir)
    sup2_path = T.run_stage(cfg, "sup2", run_dir, corpus_dir)
    sup2, _, _ = T.load_checkpoint(sup2_path)
    for br in ("S", "D"):
        rep = ev(sup2, test, br)["overall"]
        res[f"sup2_sad_{br}"] = rep["sad"]
        res[f"sup2_obj_{br}"] = rep["sad_object"]
        urep = ev(sup2, utest, br)["overall"]
        res[f"sup2_uobj_{br}"] = urep["sad_object"]
        res[f"sup2_usad_{br}"] = urep["sad"]
    res["sup2_lc"] = T.cl_eval_loss(sup2, test)
    res["init_cl_lc"] = T.cl_eval_loss(sup2, test, cl=init.cl)
    res["time_sup2"] = time.time() - t0

    for ab in ablations:
        path = T.run_stage(cfg, "cl_selfsup", run_dir, corpus_dir, ablation=ab)
        sysm, _, _ = T.load_checkpoint(path)
        for br in ("S", "D"):
            urep = ev(sysm, utest, br)["overall"]
            res[f"{ab}_uobj_{br}"] = urep["sad_object"]
            res[f"{ab}_usad_{br}"] = urep["sad"]
            res[f"{ab}_sad_{br}"] = ev(sysm, test, br)["overall"]["sad"]
        res[f"time_{ab}"] = time.time() - t0

    ref_path = T.run_stage(cfg, "refine", run_dir, corpus_dir)
    refined, _, _ = T.load_checkpoint(ref_path)
    reports = workdir / "reports"
    reports.mkdir(exist_ok=True)
    for pipe in T.PIPELINES:
        rep = ev(refined, test, pipe)
        res[f"refine_sad_{pipe}"] = rep["overall"]["sad"]
        stem = reports / f"labeled-test_{pipe.replace('+', '_')}"
        T.write_report(rep, stem.with_suffix(".json"), stem.with_suffix(".csv"))
    train = load_split(corpus_dir, "labeled-train")
    for br in ("S", "D"):
        res[f"refine_train_sad_{br}"] = ev(refined, train, br)["overall"]["sad"]
        res[f"refine_train_sad_{br}+RN"] = ev(refined, train, br + "+RN")["overall"]["sad"]
    res["time_total"] = time.time() - t0
    with open(workdir / "results.json", "w") as fh:
        json.dump(res, fh, indent=1, sort_keys=True)
    return res
