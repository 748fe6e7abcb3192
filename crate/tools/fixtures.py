"""Regenerates the committed test fixtures and prints oracle values.

    python3 tools/fixtures.py

Writes crates/core/tests/fixtures/{clusters_3x20_10d.csv,planted_uses.csv}.
The planted corpus is checked with an independent re-implementation of the
fallback embedder (3-gram FNV-1a buckets) and a brute-force union-find.
"""

import csv
import itertools
import math
import os

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "crates", "core", "tests", "fixtures")
THRESHOLD = 0.92


def clusters():
    rng = np.random.default_rng(20240517)
    side = 50.0 / math.sqrt(2.0)
    centroids = np.zeros((3, 10))
    for k in range(3):
        centroids[k, k] = side
    rows = []
    for k in range(3):
        for _ in range(20):
            rows.append((k, centroids[k] + rng.normal(0.0, 0.5, 10)))
    with open(os.path.join(FIXTURES, "clusters_3x20_10d.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["label"] + [f"x{i}" for i in range(10)])
        for k, x in rows:
            w.writerow([k] + [repr(float(v)) for v in x])
    d = [np.linalg.norm(centroids[a] - centroids[b]) for a, b in itertools.combinations(range(3), 2)]
    print("centroid distances", d)


TEMPLATES = [
    ("Recommending suitable videos for children", "Content filtering", "Video platforms", "Children", "Recommender systems"),
    ("Operating autonomous vehicles", "Acting on sensor readings for navigation", "Autonomous vehicle providers", "Road users", "Public and private transportation"),
    ("Screening job applicants", "Resume ranking", "Employers", "Job seekers", "Human resources"),
    ("Identifying suspects in crowds", "Facial recognition", "Police departments", "Passers-by", "Law enforcement"),
    ("Approving consumer loans", "Credit scoring", "Banks", "Borrowers", "Financial services"),
    ("Triaging emergency patients", "Clinical risk prediction", "Hospitals", "Patients", "Healthcare"),
    ("Grading student essays", "Automated text assessment", "Schools", "Students", "Education"),
    ("Moderating hateful posts", "Toxicity classification", "Social networks", "Posters", "Online communities"),
    ("Translating asylum interviews", "Machine translation", "Immigration offices", "Asylum seekers", "Migration"),
    ("Forecasting crop yields", "Satellite image analysis", "Agricultural cooperatives", "Farmers", "Agriculture"),
    ("Detecting insurance fraud", "Anomaly detection", "Insurers", "Policy holders", "Insurance"),
    ("Pricing ride-hailing trips", "Dynamic pricing", "Ride-hailing companies", "Riders", "Mobility services"),
    ("Answering tenant questions", "Conversational agents", "Landlords", "Tenants", "Housing"),
    ("Predicting reoffending risk", "Recidivism scoring", "Courts", "Defendants", "Criminal justice"),
    ("Generating news summaries", "Text generation", "Publishers", "Readers", "Journalism"),
    ("Monitoring warehouse workers", "Activity tracking", "Logistics firms", "Warehouse staff", "Logistics"),
    ("Allocating welfare benefits", "Eligibility prediction", "Municipalities", "Welfare claimants", "Public administration"),
    ("Tagging friends in photos", "Face clustering", "Photo-sharing apps", "App users", "Social media"),
    ("Controlling power grid loads", "Demand forecasting", "Grid operators", "Households", "Energy"),
    ("Composing background music", "Audio synthesis", "Game studios", "Players", "Entertainment"),
]

# small surface edits a model might produce for the same use
EDITS = [
    lambda p: p,
    lambda p: p + ".",
    lambda p: p.replace(" ", "  ", 1) + "!",
]


def fnv1a(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(text: str):
    chars = list(text.lower())
    v = [0.0] * 512
    grams = ["".join(chars)] if 0 < len(chars) < 3 else ["".join(chars[i : i + 3]) for i in range(len(chars) - 2)]
    for g in grams:
        v[fnv1a(g.encode("utf-8")) % 512] += 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v] if n > 0 else v


def cosine(a, b):
    return sum(x * y for x, y in zip(a, b))


def planted():
    rows = []
    for t, (purpose, cap, user, subject, domain) in enumerate(TEMPLATES):
        for e in EDITS:
            rows.append((t, e(purpose), cap, user, subject, domain))
    texts = [" | ".join(r[1:]) for r in rows]
    vecs = [embed(t) for t in texts]
    parent = list(range(len(rows)))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    intra, inter = 1.0, 0.0
    for i, j in itertools.combinations(range(len(rows)), 2):
        c = cosine(vecs[i], vecs[j])
        if rows[i][0] == rows[j][0]:
            intra = min(intra, c)
        else:
            inter = max(inter, c)
        if c >= THRESHOLD:
            parent[find(i)] = find(j)
    n_clusters = len({find(i) for i in range(len(rows))})
    print(f"planted: min intra {intra:.6f}  max inter {inter:.6f}  clusters at {THRESHOLD}: {n_clusters}")
    assert intra >= THRESHOLD > inter, "fixture does not separate at the threshold"
    with open(os.path.join(FIXTURES, "planted_uses.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["template", "purpose", "capability", "ai_user", "ai_subject", "domain"])
        w.writerows(rows)
    # reference cosines for the embedder unit test
    print("cos(facial recognition, face recognition) =", cosine(embed("facial recognition"), embed("face recognition")))
    print("cos(facial recognition, crop yield monitoring) =", cosine(embed("facial recognition"), embed("crop yield monitoring")))


def silhouette_reference():
    from sklearn.metrics import silhouette_score

    pts = np.array([[0, 0], [0, 1], [1, 0], [5, 5], [5, 6], [6, 5], [9, 0], [9, 1], [2, 2]], dtype=float)
    labels = [0, 0, 0, 1, 1, 1, 2, 2, 0]
    print("silhouette reference", repr(silhouette_score(pts, labels)))


if __name__ == "__main__":
    os.makedirs(FIXTURES, exist_ok=True)
    clusters()
    planted()
    silhouette_reference()
