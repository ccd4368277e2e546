"""Smoke test for the smellforge Python extension.

Build first, e.g. `maturin develop` or `pip install -e . --no-build-isolation`
from the repository root, then run `python python/smoke_test.py`.
"""

import json
import math
import random

import smellforge as sf


def main() -> None:
    assert sf.tokenize("Fixes the Blob-class, TODO!") == ["fixes", "the", "blob", "class", "todo"]

    corpus = sf.Corpus.synthetic(seed=7, n_packages=120, signal_strength=0.7)
    assert len(corpus) == 120
    without, with_ = corpus.class_distribution("BLOB")
    assert without + with_ == 120 and with_ > 0

    emb = sf.Embedding.train(corpus, mode="skg", dim=12, epochs=3, seed=1)
    feats = emb.featurize(corpus)
    assert len(feats) == 120 and all(len(r) == 12 for r in feats)
    assert emb.epoch_losses()[-1] < emb.epoch_losses()[0]

    rng = random.Random(0)
    x = [[rng.gauss(0, 1), rng.gauss(0, 1)] for _ in range(40)]
    y = [i < 8 for i in range(40)]
    for row, label in zip(x, y):
        if label:
            row[0] += 2.5
    bx, by = sf.resample(x, y, method="svmsmote", seed=3)
    assert sum(by) * 2 == len(by) and bx[:40] == x

    model = sf.Kelm.train(bx, by, kernel="rbfk", reg_c=10.0)
    auc = sf.roc_auc(model.scores(x), y)
    assert 0.8 <= auc <= 1.0, auc
    u, p = sf.rank_sum([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    assert u == 0.0 and math.isclose(p, 0.1)

    config = {"embedding": {"dim": 8, "epochs": 2}, "kernels": ["RBFK"], "samplings": ["ORD", "SMOTE"]}
    report = sf.run_experiment(corpus, seed=5, config_json=json.dumps(config))
    assert len(report) == 2 * 2 * 2 * 8
    mean_auc = report.mean("auc", "sampling", "SMOTE")
    assert mean_auc is not None and 0.0 <= mean_auc <= 1.0
    again = sf.Report.from_json(report.to_json())
    assert again.to_json() == report.to_json()
    groups = dict(report.summary("feature_gen", "accuracy"))
    assert set(groups) <= {"CBOW", "SKG"}

    print(f"smoke test passed: {report.ok_cells}/{len(report)} cells ok, SMOTE mean AUC {mean_auc:.3f}")


if __name__ == "__main__":
    main()
