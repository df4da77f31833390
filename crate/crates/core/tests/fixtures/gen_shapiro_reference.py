import json, numpy as np
from scipy import stats
rng = np.random.default_rng(20190605)
cases = []
sizes = [10, 50, 300]
kinds = ["normal", "uniform", "contaminated"]
for i in range(50):
    n = sizes[i % 3]
    kind = kinds[(i // 3) % 3]
    if kind == "normal":
        x = rng.normal(0.0, 1.0, n)
    elif kind == "uniform":
        x = rng.uniform(-1.0, 1.0, n)
    else:
        x = rng.normal(0.0, 1.0, n)
        x[rng.integers(n)] = 20.0
    w, p = stats.shapiro(x)
    cases.append({"kind": kind, "n": n, "values": [float(v) for v in x], "w": float(w), "p": float(p)})
x = [1,2,2,3,3,3,4,4,5]
w, p = stats.shapiro(x)
out = {"generator": "numpy default_rng(20190605), scipy %s stats.shapiro" % __import__("scipy").__version__,
       "small_example": {"values": [float(v) for v in x], "w": float(w), "p": float(p)},
       "cases": cases}
json.dump(out, open("shapiro_reference.json", "w"), indent=1)
print(w, p)
for c in cases[:9]: print(c["kind"], c["n"], c["w"], c["p"])
