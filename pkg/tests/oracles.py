"""Independent reference implementations used only by the tests.

They are written the slow, obvious way and share no code with the package.
"""

import math
from itertools import combinations

SECONDS_PER_YEAR = 365.25 * 86400


def tie_frequency(records, ego, alter, reference):
    """Direct contacts per year between first contact and ``reference``."""
    hits = [r for r in records if r["ego"] == ego and r["alter"] == alter
            and r["kind"] in ("reply", "mention", "retweet")]
    first = min(r["ts"] for r in hits)
    years = (reference - first).total_seconds() / SECONDS_PER_YEAR
    return len(hits) / years


def jaccard(rings_per_window, i):
    terms = []
    for t in range(len(rings_per_window) - 1):
        a = set(rings_per_window[t][i])
        b = set(rings_per_window[t + 1][i])
        if not a and not b:
            terms.append(1.0)
        else:
            terms.append(len(a & b) / len(a | b))
    return sum(terms) / len(terms)


def jump(rings_per_window, i, n):
    total = 0.0
    pairs = 0
    for t in range(len(rings_per_window) - 1):
        dest = set(rings_per_window[t + 1][i])
        if not dest:
            continue
        deltas = []
        for alter in dest:
            src = n + 1
            for j in range(n):
                if alter in rings_per_window[t][j]:
                    src = j + 1
            deltas.append(abs(src - (i + 1)))
        total += sum(deltas) / len(deltas)
        pairs += 1
    return total / pairs if pairs else 0.0


def kendall_tau_b(x, y):
    """tau-b by explicit pair enumeration."""
    conc = disc = tie_x = tie_y = 0
    for i, j in combinations(range(len(x)), 2):
        dx = x[i] - x[j]
        dy = y[i] - y[j]
        if dx == 0 and dy == 0:
            tie_x += 1
            tie_y += 1
        elif dx == 0:
            tie_x += 1
        elif dy == 0:
            tie_y += 1
        elif (dx > 0) == (dy > 0):
            conc += 1
        else:
            disc += 1
    n0 = len(x) * (len(x) - 1) // 2
    return (conc - disc) / math.sqrt((n0 - tie_x) * (n0 - tie_y)), conc - disc


def kendall_p(x, y):
    """Normal approximation with tie-corrected variance and continuity correction."""
    n = len(x)
    _, s = kendall_tau_b(x, y)

    def groups(v):
        counts = {}
        for a in v:
            counts[a] = counts.get(a, 0) + 1
        return [c for c in counts.values() if c > 1]

    gx, gy = groups(x), groups(y)
    v0 = n * (n - 1) * (2 * n + 5)
    vt = sum(t * (t - 1) * (2 * t + 5) for t in gx)
    vu = sum(u * (u - 1) * (2 * u + 5) for u in gy)
    v1 = sum(t * (t - 1) for t in gx) * sum(u * (u - 1) for u in gy)
    v2 = sum(t * (t - 1) * (t - 2) for t in gx) * sum(u * (u - 1) * (u - 2) for u in gy)
    var = (v0 - vt - vu) / 18 + v1 / (2 * n * (n - 1))
    if n > 2:
        var += v2 / (9 * n * (n - 1) * (n - 2))
    z = max(abs(s) - 1, 0) / math.sqrt(var)
    return math.erfc(z / math.sqrt(2))


def dbscan_noise(points, eps, min_pts):
    """Noise flags by the textbook definition: not core and not within eps of a core."""
    n = len(points)

    def d(a, b):
        return math.sqrt(sum((p - q) ** 2 for p, q in zip(a, b)))

    neigh = [[j for j in range(n) if d(points[i], points[j]) <= eps] for i in range(n)]
    core = [len(neigh[i]) >= min_pts for i in range(n)]
    return [not core[i] and not any(core[j] for j in neigh[i]) for i in range(n)]


def standardize(points):
    cols = list(zip(*points))
    out_cols = []
    for c in cols:
        m = sum(c) / len(c)
        sd = math.sqrt(sum((v - m) ** 2 for v in c) / len(c))
        out_cols.append([(v - m) / sd if sd > 0 else 0.0 for v in c])
    return [tuple(r) for r in zip(*out_cols)]


def silhouette(points, labels):
    def d(a, b):
        return math.sqrt(sum((p - q) ** 2 for p, q in zip(a, b)))

    vals = []
    for i, p in enumerate(points):
        own = [j for j in range(len(points)) if labels[j] == labels[i] and j != i]
        if not own:
            vals.append(0.0)
            continue
        a = sum(d(p, points[j]) for j in own) / len(own)
        b = min(
            sum(d(p, points[j]) for j in range(len(points)) if labels[j] == c)
            / sum(1 for j in range(len(points)) if labels[j] == c)
            for c in set(labels) if c != labels[i]
        )
        vals.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return sum(vals) / len(vals)


def metrics(tp, fp, tn, fn):
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return {
        "precision": precision,
        "recall": recall,
        "accuracy": (tp + tn) / (tp + fp + tn + fn),
        "f1": 2 * precision * recall / (precision + recall),
    }


def mean_shift(values, h, tol=1e-6, max_iter=500):
    """Plain per-point Gaussian mean shift on log10(1 + w), modes merged when
    consecutive sorted modes are closer than h / 2. Returns (labels, tau)
    with label 1 for the highest mode."""
    x = [math.log10(1 + v) for v in values]
    modes = []
    for start in x:
        m = start
        for _ in range(max_iter):
            num = den = 0.0
            for p in x:
                k = math.exp(-0.5 * ((m - p) / h) ** 2)
                num += k * p
                den += k
            new = num / den
            done = abs(new - m) < tol
            m = new
            if done:
                break
        modes.append(m)
    order = sorted(range(len(x)), key=lambda i: modes[i])
    group = {}
    g = 0
    for a, b in zip([None] + order, order):
        if a is not None and modes[b] - modes[a] >= h / 2:
            g += 1
        group[b] = g
    tau = g + 1
    return [tau - group[i] for i in range(len(x))], tau


def best_partition_sse(values, k):
    """Minimum within-group SSE over every split of the sorted distinct
    log10(1 + w) values into k contiguous groups (exhaustive)."""
    x = [math.log10(1 + v) for v in values]
    uniq = sorted(set(x))
    w = [x.count(u) for u in uniq]
    m = len(uniq)

    def sse(lo, hi):
        tot = sum(w[lo:hi])
        mean = sum(w[i] * uniq[i] for i in range(lo, hi)) / tot
        return sum(w[i] * (uniq[i] - mean) ** 2 for i in range(lo, hi))

    best = math.inf
    for cuts in combinations(range(1, m), min(k, m) - 1):
        bounds = (0, *cuts, m)
        best = min(best, sum(sse(a, b) for a, b in zip(bounds, bounds[1:])))
    return best
