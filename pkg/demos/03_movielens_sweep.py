# %% [markdown]
# # MAE sweep on MovieLens 100K
#
# Repeats an 80/20 split, predicts each held-out rating from k neighbors and
# reports mean absolute error per similarity. Set `ML100K_PATH` or place
# `u.data` under `data/ml-100k/`. Two splits keep this demo to a few minutes;
# the acceptance suite runs ten.

# %%
import os
from pathlib import Path

from mcrcf.evaluation import ExperimentConfig, emit_report, run_experiment
from mcrcf.ratings import load_ratings

path = Path(os.environ.get("ML100K_PATH", Path(__file__).parents[1] / "data/ml-100k/u.data"))
ratings = load_ratings(path, "ml100k")
print(len(ratings), "ratings,", len(ratings.users), "users,", len(ratings.items), "items")

# %%
cfg = ExperimentConfig(
    similarities=("tf", "bm25", "dirichlet", "jelinek_mercer", "acs", "wacs"),
    k_values=(10, 40, 160),
    split_count=2,
)
report = run_experiment(cfg, ratings)
for row in report.rows:
    print(f"{row.mode:<11} {row.similarity:<15} k={row.k:<4} MAE {row.mae_mean:.4f}  coverage {row.coverage:.3f}")

# %%
emit_report(report, "sweep.csv")
