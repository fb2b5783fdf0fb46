#!/usr/bin/env python3
"""Writes data/questionnaires/reference_expert_{1,2,3}.json.

Each expert answers every context with a fully consistent matrix
(judgment = w_i / w_j). Expert 1 states the bundled column weights
normalized to 100; experts 2 and 3 are mirror-image deviations of +/-d
around it, so the arithmetic mean of the three priority vectors equals
expert 1's vector and building tables from the three files reproduces
data/tables_reference.json up to column normalization.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
TABLES = json.loads((ROOT / "data" / "tables_reference.json").read_text())

QUANTITIES = ["MW", "MVAR", "KV", "TAP", "STATUS"]
COMPONENTS = ["UNIT_LOAD_TRANSFORMER", "TRANSMISSION_TRANSFORMER", "GENERATOR",
              "TRANSMISSION_LINE", "REACTOR_CAPACITOR", "BUSBAR"]


def deviation(n, scale):
    # Zero-sum pattern of alternating sign; odd sizes leave the last item fixed.
    pattern = [(1 if i % 2 == 0 else -1) for i in range(n)]
    if n % 2 == 1:
        pattern[-1] = 0
    return [scale * p for p in pattern]


def matrix(context, items, weights):
    judgments = []
    for r in range(len(items)):
        for c in range(r + 1, len(items)):
            judgments.append({"row": r, "col": c, "value": weights[r] / weights[c]})
    return {"context": context, "items": items, "judgments": judgments}


def contexts():
    for comp in COMPONENTS:
        col = TABLES["m_table"][comp]
        items = [q for q in QUANTITIES if q in col]
        yield ({"kind": "quantities_within_component", "component": comp}, items,
               [col[q] for q in items])
    for qty in QUANTITIES:
        col = TABLES["n_table"][qty]
        items = [c for c in COMPONENTS if c in col]
        yield ({"kind": "components_within_quantity", "quantity": qty}, items,
               [col[c] for c in items])


def main():
    out_dir = ROOT / "data" / "questionnaires"
    out_dir.mkdir(parents=True, exist_ok=True)
    for expert, sign in (("reference_expert_1", 0), ("reference_expert_2", 1),
                         ("reference_expert_3", -1)):
        matrices = []
        for context, items, raw in contexts():
            total = sum(raw)
            base = [100.0 * w / total for w in raw]
            # Deviation of 20% of the smallest weight keeps every weight positive.
            d = deviation(len(base), 0.2 * min(base))
            weights = [b + sign * x for b, x in zip(base, d)]
            matrices.append(matrix(context, items, weights))
        doc = {"expert_id": expert, "matrices": matrices}
        (out_dir / f"{expert}.json").write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
