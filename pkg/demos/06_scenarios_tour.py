#!/usr/bin/env python3
"""Every scenario the harness supports, on the bundled corpus.

  brand         which camera maker produced the file (4-way)
  tool          which editing tool touched it, if any (3-way)
  social        which sharing service re-encoded it, if any (3-way)
  manip-social  pristine vs edited, decision tree (2-way)
  manip-local   pristine vs edited, leave-one-device-model-out folds
  blind-device  hold a whole device model out of training and see
                where its videos land in the trained brand plane
"""

from pathlib import Path

from vidmeta import (
    ScenarioConfig,
    ingest,
    load_manifest,
    run_blind_device,
    run_leave_one_model_out,
    run_scenario,
)

DATA = Path(__file__).resolve().parent.parent / "data" / "synthetic"


def main():
    records, _ = ingest(load_manifest(DATA / "manifest.csv"), DATA)
    print(f"corpus: {len(records)} files\n")

    for scenario in ("brand", "tool", "social", "manip-social"):
        report = run_scenario(ScenarioConfig(scenario=scenario), records)
        f1 = ", ".join(
            f"{cls}={report.metrics.per_class_f1[cls]:.2f}" for cls in report.classes
        )
        print(f"{scenario:<13} {report.model.kind:<8} "
              f"BA {report.metrics.balanced_accuracy:.3f}   F1: {f1}")

    loo = run_leave_one_model_out(ScenarioConfig(scenario="manip-local"), records)
    print(f"{'manip-local':<13} {'tree':<8} "
          f"mean BA {loo.mean_balanced_accuracy:.3f} over {len(loo.folds)} device folds")
    for fold in loo.folds:
        if "skipped" in fold:
            print(f"    {fold['model_id']:<6} skipped: {fold['skipped']}")
        else:
            print(f"    {fold['model_id']:<6} BA {fold['balanced_accuracy']:.3f} "
                  f"({fold['n_validation']} videos)")

    print()
    for holdout in ("AC200", "CVX", "DR5"):
        bd = run_blind_device(ScenarioConfig(scenario="blind-device"), records, holdout)
        print(f"blind-device  holdout {holdout}: "
              f"{bd.fraction_in_true_region:.0%} of {bd.n_holdout} videos "
              f"land in their true brand's region")


if __name__ == "__main__":
    main()
