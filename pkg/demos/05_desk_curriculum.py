"""
Desk-scale curriculum
=====================

Generate the synthetic corpus, run every training stage with the desk
preset (halved epoch counts), the three self-supervision ablations and the
refiner, then print the headline numbers. Takes roughly 20 minutes on one
CPU core.
"""
import json
import logging
import sys

from hoimatte.experiment import run_desk_curriculum

logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
workdir = sys.argv[1] if len(sys.argv) > 1 else "demo_out/desk"
res = run_desk_curriculum(workdir)

print(json.dumps(res, indent=1, sort_keys=True))
print("whole-image SAD, init -> sup2 (S):", round(res["init_sad_S"], 1), "->", round(res["sup2_sad_S"], 1))
print("object SAD at sup2, S vs D:", round(res["sup2_obj_S"], 2), round(res["sup2_obj_D"], 2))
for ab in ("full", "cs_only", "dc_only"):
    print(f"unlabeled object SAD after {ab}: S {res[f'{ab}_uobj_S']:.2f}")
