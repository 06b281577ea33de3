# %% [markdown]
# # Query latency: inverted index versus exhaustive scan
#
# A synthetic 10,000-user corpus with Zipf-like item popularity. The index
# touches only users sharing an item with the query; the exhaustive scan
# scores everyone.

# %%
import time

import numpy as np

from mcrcf.baselines import BruteForce
from mcrcf.evaluation import build_mode_index
from mcrcf.knn import KnnConfig, knn
from mcrcf.ratings import compute_means
from mcrcf.synthetic import sparse_corpus

ds = sparse_corpus(n_users=10_000, n_items=1_000, ratings_per_user=40, seed=0)
means = compute_means(ds)
index = build_mode_index(ds, means, "user_based", 100)
brute = BruteForce(ds, means, "user_based")
users = np.random.default_rng(1).choice(sorted(ds.users), 200, replace=False).tolist()


# %%
def per_query(fn):
    t0 = time.perf_counter()
    for u in users:
        fn(u)
    return (time.perf_counter() - t0) / len(users)


t_index = per_query(lambda u: knn(index, ds.by_user[u].items(), means.user_mean[u], KnnConfig(20), exclude_self=u))
t_brute = per_query(lambda u: brute.knn(u, 20, "acs"))
print(f"index {t_index * 1e3:.2f} ms   brute force {t_brute * 1e3:.2f} ms   speedup {t_brute / t_index:.1f}x")
