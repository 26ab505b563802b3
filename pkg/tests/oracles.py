"""Independent reference implementations used to check the library.

None of these call into the code paths they check: the replay works on
plain JSON documents with string-keyed dicts, the enumerators are written
recursively from scratch, and the set-cover oracle tries every subset.
"""
from __future__ import annotations

import itertools


def replay(model_doc: dict, plan_doc: dict) -> list[float]:
    """Naive event replay: literal set and dict mutations, one value per tick."""
    mod_risk = {m["id"]: m.get("p", 1.0) * m.get("impact", 1.0) for m in model_doc["modules"]}
    default = model_doc.get("default_impact", 1.0)
    catalog = {}
    for i in model_doc.get("interfaces", []):
        catalog["|".join(sorted((i["a"], i["b"])))] = i.get("p", 1.0) * i.get("impact", 1.0)

    risk: dict[str, float] = {}
    members: dict[str, set] = {}
    owned: dict[str, set] = {}
    out: list[float] = []

    def total():
        return sum(risk.values())

    for ci, cycle in enumerate(plan_doc["cycles"]):
        for m in cycle.get("available", []):
            risk["M:" + m] = mod_risk[m]
        for a in cycle.get("carry_in", []):
            label = f"R:{a}:{ci}"
            risk[label] = default
            owned.setdefault(a, set()).add(label)
        out.append(total())
        for act in cycle.get("actions", []):
            for _ in range(act.get("duration", 1) - 1):
                out.append(total())
            asm = act["assembly"]
            if act["type"] == "integrate":
                members.setdefault(asm, set())
                owned.setdefault(asm, set())
                for other in act.get("merge", []):
                    members[asm] |= members.pop(other, set())
                    owned[asm] |= owned.pop(other, set())
                    members[other] = set()
                members[asm] |= set(act.get("add", []))
                for pair in act.get("interfaces", []):
                    key = "|".join(sorted(pair))
                    risk["I:" + key] = catalog.get(key, default)
                    owned[asm].add("I:" + key)
            else:
                eff = act.get("effectiveness", 1.0)
                labels = ["M:" + m for m in members.get(asm, set())] + sorted(owned.get(asm, set()))
                if members.get(asm):
                    for label in labels:
                        if label in risk:
                            risk[label] = 0.0 if eff >= 1.0 else risk[label] * (1.0 - eff)
            out.append(total())
    return out


def surjections(n: int, k: int):
    """All maps {0..n-1} -> {0..k-1} hitting every block, built recursively."""

    def rec(i, acc):
        if i == n:
            if len(set(acc)) == k:
                yield tuple(acc)
            return
        for b in range(k):
            yield from rec(i + 1, acc + [b])

    yield from rec(0, [])


def chunkings(seq, first_pair: bool):
    """Cut ``seq`` into consecutive chunks of size 1 or 2 (first chunk a pair if asked)."""
    if not seq:
        yield []
        return
    sizes = (2,) if first_pair else (1, 2)
    for s in sizes:
        if len(seq) >= s:
            for rest in chunkings(seq[s:], False):
                yield [tuple(sorted(seq[:s]))] + rest


def cycle_orders(preds: dict, pool: list, placed: frozenset, fresh: bool):
    """Distinct precedence-respecting step sequences, via permutations + chunking."""
    if not pool:
        return [[]]
    if fresh and len(pool) == 1:
        return [[]]
    found = set()
    for perm in itertools.permutations(sorted(pool)):
        for steps in chunkings(list(perm), fresh):
            ok, seen = True, set(placed)
            for step in steps:
                if any(not preds[m] <= seen | set(step) for m in step):
                    ok = False
                    break
                seen |= set(step)
            if ok:
                found.add(tuple(steps))
    return [list(s) for s in sorted(found)]


def all_step_plans(model_doc: dict, max_cycles: int):
    """Every (blocks, orders) pair in the optimizer's search space."""
    ids = sorted(m["id"] for m in model_doc["modules"])
    preds = {m: set() for m in ids}
    for a, b in model_doc.get("precedence", []):
        preds[b].add(a)
    n = len(ids)
    memo: dict = {}
    for k in range(1, min(max_cycles, n) + 1):
        for assign in surjections(n, k):
            blocks = [[m for m, b in zip(ids, assign) if b == j] for j in range(k)]

            def rec(i, placed, pending, has_asm, acc):
                if i == k:
                    if not pending or n == 1:
                        yield acc
                    return
                pool = pending + blocks[i]
                key = (tuple(sorted(pool)), frozenset(placed), not has_asm)
                if key not in memo:
                    memo[key] = cycle_orders(preds, pool, frozenset(placed), not has_asm)
                for steps in memo[key]:
                    used = {m for s in steps for m in s}
                    left = [m for m in pool if m not in used]
                    yield from rec(i + 1, placed | used, left, has_asm or bool(steps), acc + [steps])

            for orders in rec(0, set(), [], False, []):
                yield blocks, orders


def min_cover_size(need: set, cases: dict[str, set]) -> int:
    """Exhaustive minimum-cardinality cover over every subset of cases."""
    ids = sorted(cases)
    for size in range(0, len(ids) + 1):
        for combo in itertools.combinations(ids, size):
            got = set()
            for c in combo:
                got |= cases[c]
            if need <= got:
                return size
    raise ValueError("not coverable")


def repeated_sum(*factors: int) -> int:
    """Product of positive integers by repeated addition."""
    acc = 1
    for f in factors:
        total = 0
        for _ in range(f):
            total += acc
        acc = total
    return acc


def step_plan_doc(model_doc: dict, blocks, orders) -> dict:
    """Plan document for one point of the search space, one test per step."""
    links = {frozenset((i["a"], i["b"])) for i in model_doc.get("interfaces", [])}
    members: set = set()
    cycles = []
    for ci, (block, steps) in enumerate(zip(blocks, orders)):
        carry = ["A"] if members else []
        actions = []
        for step in steps:
            pairs = sorted({tuple(sorted((a, b))) for a in step for b in members | set(step)
                            if a != b and frozenset((a, b)) in links})
            actions.append({"type": "integrate", "id": "I", "assembly": "A", "add": list(step),
                            "interfaces": [list(p) for p in pairs] or [[step[0], "A"]]})
            actions.append({"type": "test", "id": "T", "assembly": "A"})
            members |= set(step)
        cycles.append({"label": f"k{ci + 1}", "available": list(block), "carry_in": carry, "actions": actions})
    return {"cycles": cycles}


def brute_force_optimum(model_doc: dict, max_cycles: int, objective: str) -> tuple[float, int]:
    """(best objective value, number of plans) over the whole search space."""
    best, count = None, 0
    for blocks, orders in all_step_plans(model_doc, max_cycles):
        values = replay(model_doc, step_plan_doc(model_doc, blocks, orders))
        if objective == "average_risk":
            score = sum(values) / len(values)
        elif objective == "max_risk":
            score = max(values)
        else:
            score = float(len(values))
        count += 1
        best = score if best is None else min(best, score)
    return best, count
