# %% [markdown]
# # Mean-centered rates as text
#
# A user profile becomes a document: each rated item is a word, repeated
# once per hundredth of the rating's distance from the user's mean. The
# sign of that distance picks the prefix (`p` above the mean, `n` below).

# %%
import math

from mcrcf.encoder import encode_profile, encode_query
from mcrcf.index import build_index, search
from mcrcf.knn import KnnConfig, knn_terms

# a user with mean 3.95 who rated item 37 a 4 and item 24 a 3.91
doc = encode_profile(1, [(37, 4), (24, 3.91)], 3.95, scale_factor=100)
print("PRATE:", doc.text("PRATE"))
print("NRATE:", doc.text("NRATE"))
print("norm :", doc.norm, "=", math.sqrt(41))

# %% [markdown]
# The query user sits 0.03 and 0.06 above their own mean on the same items.

# %%
query = encode_query([(37, 3.03), (24, 3.06)], 3.0, scale_factor=100)
print({str(t): f for t, f in query.items()})

# %% [markdown]
# Searching PRATE finds agreement (same prefix), searching NRATE finds
# disagreement. Subtracting the two gives the signed similarity.

# %%
index = build_index([doc], "user_based", 100)
qn = math.sqrt(45)
print("PRATE  :", search(index, "PRATE", query, 1)[0].score / qn)
print("NRATE  :", search(index, "NRATE", query, 1)[0].score / qn)
print("merged :", knn_terms(index, query, KnnConfig(1), normalize_query=True)[0].similarity)
print("by hand:", (3 * 5 - 6 * 4) / (math.sqrt(45) * math.sqrt(41)))
