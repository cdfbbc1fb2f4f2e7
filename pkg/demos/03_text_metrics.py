"""
Scoring answers with ROUGE-1, METEOR and BLEU
=============================================

Near-miss answers keep high unigram overlap but lose BLEU's higher-order
n-grams, which is why a model can look good on ROUGE-1 and METEOR while
choosing the wrong action.
"""

from meshpilot import align_unigrams, score

reference = "Update Neighbors of node 1"
candidates = [
    "Update Neighbors of node 1",
    "Update Neighbors of node 2",
    "Update Local Position of node 1",
    "node 1 Update Neighbors of",
    "No Action",
    "I would update the neighbors of node 1 right away",
]

print(f"{'hypothesis':<50} {'ROUGE-1':>8} {'METEOR':>8} {'BLEU':>8}  chunks")
for hyp in candidates:
    s = score(hyp, reference)
    al = align_unigrams(hyp, reference)
    print(f"{hyp:<50} {s.rouge1_f:8.4f} {s.meteor:8.4f} {s.bleu:8.4f}  {al.chunks}/{al.matches}")
