"""A reproducible data pipeline, end to end.

Gaussian blob generation, CSV loading, stratified splitting, and
shuffled mini-batching are all driven by one counter-based RNG, so every
stage is a pure function of its seeds.  This script shows each stage and
proves the replay property by rebuilding everything twice.
"""

import tempfile
from pathlib import Path

import numpy as np

from adafamily.data import (
    BatchPlan,
    batches,
    gen_gaussian_blobs,
    load_csv_dataset,
    split,
)


def main():
    print("=== generate: gaussian blobs ===")
    data = gen_gaussian_blobs(seed=7, n_per_class=50, dim=4, num_classes=3, spread=0.3)
    again = gen_gaussian_blobs(seed=7, n_per_class=50, dim=4, num_classes=3, spread=0.3)
    print(f"{data.n} rows, {data.num_features} features, {data.num_classes} classes")
    print(f"bitwise replay: {np.array_equal(data.features, again.features)}")
    print(f"class counts:   {np.bincount(data.labels).tolist()}")
    print()

    print("=== round-trip through CSV ===")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "blobs.csv"
        rows = [
            ",".join([str(label)] + [repr(float(x)) for x in feats])
            for label, feats in zip(data.labels, data.features)
        ]
        path.write_text("\n".join(rows) + "\n")
        loaded = load_csv_dataset(path, num_classes=3)
        print(f"features identical after round-trip: "
              f"{np.array_equal(loaded.features, data.features)}")
    print()

    print("=== stratified split ===")
    train, test = split(data, test_fraction=0.2, seed=11)
    print(f"train {train.n} rows {np.bincount(train.labels).tolist()}, "
          f"test {test.n} rows {np.bincount(test.labels).tolist()}")
    print("every class keeps its 80/20 proportion exactly")
    print()

    print("=== deterministic mini-batches ===")
    plan = BatchPlan(batch_size=32, shuffle_seed=99)
    sizes = [b.n for b in batches(train, plan, epoch_index=0)]
    print(f"epoch 0 batch sizes: {sizes} (short tail kept)")
    first_a = next(iter(batches(train, plan, epoch_index=0))).features[0]
    first_b = next(iter(batches(train, plan, epoch_index=0))).features[0]
    first_c = next(iter(batches(train, plan, epoch_index=1))).features[0]
    print(f"epoch 0 replays bitwise:      {np.array_equal(first_a, first_b)}")
    print(f"epoch 1 shuffles differently: {not np.array_equal(first_a, first_c)}")
    print()
    print("the shuffle depends only on (shuffle_seed, epoch_index), never on")
    print("global state, so any epoch can be reproduced in isolation.")


if __name__ == "__main__":
    main()
