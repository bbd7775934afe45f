"""Command-line interface: ``propnr <command> ...``.

Long computations (the structure enumeration and the extension run) write
into a cache directory, taken from ``--cache-dir``, then ``$PROPNR_CACHE``,
then ``~/.cache/propnr``.  Reports read those caches and fail with a hint
naming the command to run when a cache is missing.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

SCHEMA_VERSION = 1
TIERS = ("fast", "medium", "long")
DEFAULT_SEED = 20240229


@dataclass(frozen=True)
class RunConfig:
    jobs: int = 1
    cache_dir: Path = Path("~/.cache/propnr").expanduser()
    tier: str = "fast"
    output_format: str = "text"
    seed: int = DEFAULT_SEED

    def allows(self, tier: str) -> bool:
        return TIERS.index(tier) <= TIERS.index(self.tier)

    @property
    def levels_dir(self) -> Path:
        return self.cache_dir / "levels"

    @property
    def structures_file(self) -> Path:
        return self.cache_dir / "nr_structures.txt"

    @property
    def extensions_dir(self) -> Path:
        return self.cache_dir / "extensions"


class MissingCache(RuntimeError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get("PROPNR_CACHE")
    return Path(env).expanduser() if env else Path("~/.cache/propnr").expanduser()


# ------------------------------------------------------------------ reports


def report_constructions() -> dict:
    import numpy as np

    from .constructions import hamming16, nordstrom_robinson, rm14
    from .gf2core import coset_decomposition, kernel, min_distance, span
    from .permgroup import (
        action_on_cosets,
        affine_group,
        induced_label_perms,
        is_k_transitive,
        sym_h16,
        sym_of_subcode,
        translation_subgroup,
    )

    nr = nordstrom_robinson()
    sp = span(nr)
    ker = kernel(nr)
    dec = coset_decomposition(nr)
    sym = sym_of_subcode(nr)
    h = sym_h16()
    trans = translation_subgroup()
    ag = affine_group()
    tid = ag.ids(trans.perms.astype(np.int64))
    conj = ag.conj(np.arange(len(ag))[:, None], tid[None, :])
    induced = action_on_cosets(sym, dec)
    labels = induced_label_perms(sym, dec.cosets())
    trivial = (labels == np.arange(labels.shape[1])).all(axis=1)
    acting_trivially = {tuple(int(v) for v in p) for p in sym.perms[trivial]}
    return {
        "nr_parameters": list(nr.parameters()),
        "nr_min_distance": min_distance(nr),
        "span_dimension": sp.dimension,
        "span_is_rm24": sp.code == hamming16(),
        "kernel_dimension": len(ker).bit_length() - 1,
        "kernel_is_rm14": ker == rm14(),
        "sym_h16_order": h.order,
        "translations_order": trans.order,
        "translations_normal": bool(np.isin(conj, tid).all()),
        "sym_nr_order": sym.order,
        "coset_action_order": induced.order,
        "coset_action_2_transitive": is_k_transitive(induced, 2),
        "coset_action_kernel": int(trivial.sum()),
        "coset_action_kernel_is_translations": acting_trivially == {tuple(int(v) for v in p) for p in trans.perms},
    }


def report_partitions(verify: bool = True, base=None) -> dict:
    from .constructions import nordstrom_robinson
    from .partition import (
        a7_orbits,
        all_fano_planes,
        brute_force_partitions,
        partition_iso_classes,
        partitions_containing,
    )

    n = nordstrom_robinson() if base is None else base
    planes = all_fano_planes()
    parts = partitions_containing(n)
    out = {
        "fano_planes": len(planes),
        "a7_orbits": sorted(len(o) for o in a7_orbits(planes)),
        "count": len(parts),
        "all_valid": all(p.is_valid() for p in parts),
        "iso_classes": len(partition_iso_classes(parts)),
    }
    if verify:
        bf = brute_force_partitions(n)
        out["brute_force_count"] = len(bf)
        out["brute_force_matches"] = {frozenset(_block_words(n, fs)) for fs in bf} == {
            p.block_set() for p in parts
        }
    return out


def _block_words(n, translators):
    from .gf2core import translate

    return [n.words] + [translate(n, t).words for t in translators]


def report_structures(cfg: RunConfig, exact_iso: bool = False) -> dict:
    from .structure import fingerprint, groups_isomorphic, is_normalized, load_structures

    if not cfg.structures_file.exists():
        raise MissingCache(
            f"{cfg.structures_file} not found; run `propnr --tier long enumerate-structures` first"
        )
    ss = load_structures(cfg.structures_file)
    fps = [fingerprint(s) for s in ss]
    norm = [i for i, s in enumerate(ss) if is_normalized(s)]
    out = {
        "conj": len(ss),
        "normalized_conj": len(norm),
        "fingerprint_iso_lb": len(set(fps)),
        "normalized_fingerprint_iso_lb": len({fps[i] for i in norm}),
        "targets": {"iso": 250, "normalized_iso": 25},
    }
    out["fingerprint_gap"] = out["targets"]["iso"] - out["fingerprint_iso_lb"]
    out["normalized_fingerprint_gap"] = out["targets"]["normalized_iso"] - out["normalized_fingerprint_iso_lb"]
    if exact_iso:
        classes, unknown = _iso_classes(ss, fps, groups_isomorphic)
        out["iso_classes_exact"] = None if unknown else len(classes)
        out["iso_classes_upper"] = len(classes)
        out["iso_undecided_pairs"] = unknown
        nset = set(norm)
        ncls = {tuple(c) for c in ([i for i in cl if i in nset] for cl in classes) if c}
        out["normalized_iso_classes_upper"] = len(ncls)
        out["normalized_iso_classes_exact"] = None if unknown else len(ncls)
    return out


def _iso_classes(ss, fps, test) -> Tuple[List[List[int]], int]:
    """Greedy isomorphism classes inside fingerprint buckets; counts undecided comparisons."""
    buckets: Dict[object, List[int]] = {}
    for i, f in enumerate(fps):
        buckets.setdefault(f, []).append(i)
    classes: List[List[int]] = []
    unknown = 0
    for idxs in buckets.values():
        local: List[List[int]] = []
        for i in idxs:
            for cl in local:
                r = test(ss[cl[0]], ss[i])
                if r is None:
                    unknown += 1
                if r:
                    cl.append(i)
                    break
            else:
                local.append([i])
        classes.extend(local)
    return classes, unknown


def report_extensions(cfg: RunConfig, ext_dir: Optional[Path] = None) -> dict:
    from .extension import classify_extensions

    d = cfg.extensions_dir if ext_dir is None else Path(ext_dir)
    files = sorted(d.glob("source_*.json")) if d.exists() else []
    if not files:
        raise MissingCache(f"no extension cache in {d}; run `propnr --tier long extend --all-sources` first")
    reports = [json.loads(f.read_text()) for f in files]
    if cfg.structures_file.exists():
        from .structure import load_structures

        expected = len(load_structures(cfg.structures_file))
        if len(reports) != expected:
            raise MissingCache(f"{len(reports)} of {expected} sources cached; rerun `propnr --tier long extend --all-sources`")
    return classify_extensions(reports).as_dict()


# ---------------------------------------------------------------- commands


def _emit(cfg: RunConfig, payload: dict, text: Optional[str] = None) -> None:
    if cfg.output_format == "json":
        print(json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True))
    else:
        print(text if text is not None else "\n".join(f"{k}: {v}" for k, v in payload.items()))


def cmd_construct(cfg: RunConfig, args) -> int:
    from .constructions import format_z4_code, hamming16, nordstrom_robinson, octacode, reed_muller
    from .gf2core import format_code, min_distance

    target = args.target
    if target == "nr":
        code = nordstrom_robinson()
    elif target == "h16":
        code = hamming16()
    elif target == "rm":
        if len(args.params) != 2:
            raise SystemExit("usage: construct rm R M")
        code = reed_muller(int(args.params[0]), int(args.params[1]))
    elif target == "octacode":
        z = octacode()
        if args.out:
            Path(args.out).write_text(format_z4_code(z))
        code = z.binary_image()
    else:
        raise SystemExit(f"unknown target {target!r}")
    if args.out and target != "octacode":
        Path(args.out).write_text(format_code(code))
    d = min_distance(code) if len(code) > 1 else None
    _emit(cfg, {"target": target, "n": code.length, "M": len(code), "d": d})
    return 0


def cmd_kernel(cfg: RunConfig, args) -> int:
    from .constructions import nordstrom_robinson
    from .gf2core import coset_decomposition, load_code, word_to_str

    code = load_code(args.code) if args.code else nordstrom_robinson()
    dec = coset_decomposition(code)
    payload = {
        "kernel_size": len(dec.kernel),
        "kernel_dimension": len(dec.kernel).bit_length() - 1,
        "cosets": 1 + len(dec.reps),
        "representatives": [word_to_str(r, code.length) for r in dec.reps],
    }
    _emit(cfg, payload)
    return 0


def cmd_partitions(cfg: RunConfig, args) -> int:
    from .gf2core import load_code

    base = load_code(args.base) if args.base else None
    rep = report_partitions(verify=args.verify or cfg.allows("medium"), base=base)
    ok = rep["count"] == 30 and rep["all_valid"] and rep["iso_classes"] == 2
    if "brute_force_matches" in rep:
        ok = ok and rep["brute_force_matches"]
    _emit(cfg, rep)
    return 0 if ok else 1


def cmd_enumerate(cfg: RunConfig, args) -> int:
    from .structure import enumerate_structures, save_structures

    if not cfg.allows("long"):
        print("enumerate-structures is a long-tier command; pass --tier long", file=sys.stderr)
        return 2
    log = (lambda m: print(m, file=sys.stderr, flush=True)) if cfg.output_format == "json" else print
    ss = enumerate_structures(checkpoint_dir=cfg.levels_dir, log=log, stop_level=args.stop_level)
    if ss:
        cfg.cache_dir.mkdir(parents=True, exist_ok=True)
        save_structures(ss, cfg.structures_file)
    _emit(cfg, {"classes": len(ss), "file": str(cfg.structures_file) if ss else None})
    return 0


def _extend_one(job) -> dict:
    from .extension import extend_source_cached

    sid, text, cache = job
    from .structure import parse_structure

    return extend_source_cached(sid, parse_structure(text), cache)


def cmd_extend(cfg: RunConfig, args) -> int:
    from .extension import extend_structure, source_report
    from .structure import format_structure, load_structure, load_structures

    cache = Path(args.cache) if args.cache else cfg.extensions_dir
    if args.all_sources:
        if not cfg.allows("long"):
            print("extend --all-sources is a long-tier command; pass --tier long", file=sys.stderr)
            return 2
        if not cfg.structures_file.exists():
            print(f"{cfg.structures_file} missing; run `propnr --tier long enumerate-structures` first", file=sys.stderr)
            return 2
        ss = load_structures(cfg.structures_file)
        jobs = [(i, format_structure(s), str(cache)) for i, s in enumerate(ss)]
        t0 = time.time()
        if cfg.jobs > 1:
            from multiprocessing import Pool

            with Pool(cfg.jobs) as pool:
                reps = []
                for k, r in enumerate(pool.imap(_extend_one, jobs)):
                    reps.append(r)
                    _progress(cfg, k + 1, len(jobs), t0)
        else:
            reps = []
            for k, j in enumerate(jobs):
                reps.append(_extend_one(j))
                _progress(cfg, k + 1, len(jobs), t0)
        _emit(cfg, report_extensions(cfg, cache))
        return 0
    if not args.structure:
        print("extend needs --structure FILE or --all-sources", file=sys.stderr)
        return 2
    s = load_structure(args.structure)
    rep = source_report(-1, s, extend_structure(s))
    _emit(cfg, rep, f"extensions: {rep['extensions_found']}, classes: {len(rep['conjugacy_class_reps'])}")
    return 0


def _progress(cfg: RunConfig, k: int, n: int, t0: float) -> None:
    if k % 10 == 0 or k == n:
        print(f"[{k}/{n}] {time.time() - t0:.0f}s", file=sys.stderr, flush=True)


def cmd_fingerprint(cfg: RunConfig, args) -> int:
    from .structure import fingerprint, load_structure

    s = load_structure(args.structure)
    ok, why = s.check()
    if not ok:
        print(f"not a structure: {why}", file=sys.stderr)
        return 1
    fp = fingerprint(s)
    text = "\n".join(f"order {o} centralizer {c}: {m}" for (o, c), m in fp.pairs)
    _emit(cfg, {"fingerprint": fp.as_list()}, text)
    return 0


def cmd_report(cfg: RunConfig, args) -> int:
    try:
        if args.kind == "constructions":
            rep = report_constructions()
        elif args.kind == "partitions":
            rep = report_partitions(verify=True)
        elif args.kind == "structures":
            rep = report_structures(cfg, exact_iso=args.exact_iso)
        elif args.kind == "extensions":
            rep = report_extensions(cfg)
        else:
            raise SystemExit(f"unknown report {args.kind!r}")
    except MissingCache as exc:
        print(str(exc), file=sys.stderr)
        return 2
    _emit(cfg, {"kind": args.kind, **rep})
    return 0


def verification_suite(cfg: RunConfig) -> List[Tuple[str, str, Callable[[], bool]]]:
    """Named checks with their tier; each returns True on success."""
    from .constructions import nordstrom_robinson, nr_z4_structure
    from .extension import verify_statement4
    from .partition import (
        conjugates_of_sym,
        disjoint_by_criterion,
        hamming_representation,
        lemma2_holds,
        reduced_nr_codes_in_h16,
    )
    from .structure import is_normalized

    def constructions() -> bool:
        r = report_constructions()
        return (
            r["nr_parameters"] == [16, 256, 6]
            and r["span_dimension"] == 11
            and r["kernel_dimension"] == 5
            and r["sym_h16_order"] == 322560
            and r["sym_nr_order"] == 40320
            and r["coset_action_2_transitive"]
            and r["coset_action_kernel"] == 16
            and r["coset_action_kernel_is_translations"]
            and r["translations_normal"]
        )

    def lemma2() -> bool:
        return all(lemma2_holds(c) for c in reduced_nr_codes_in_h16())

    def lemma3() -> bool:
        from .constructions import hamming16

        n = nordstrom_robinson()
        return all(
            disjoint_by_criterion(0, s, n) == n.isdisjoint(_shift(n, s)) for s in hamming16().words
        )

    def cosets() -> bool:
        return len(hamming_representation(nordstrom_robinson()).coset_rep) == 64

    def partitions() -> bool:
        r = report_partitions(verify=cfg.allows("medium"))
        return r["count"] == 30 and r["iso_classes"] == 2 and r.get("brute_force_matches", True)

    def reduced_codes() -> bool:
        return len(reduced_nr_codes_in_h16()) == 8 and len(conjugates_of_sym()) == 8

    def z4() -> bool:
        s = nr_z4_structure()
        return s.check()[0] and len(s) == 256 and not is_normalized(s) and verify_statement4(search=cfg.allows("medium")).ok

    return [
        ("constructions", "fast", constructions),
        ("lemma2", "fast", lemma2),
        ("lemma3", "fast", lemma3),
        ("kernel_cosets", "fast", cosets),
        ("partitions", "fast", partitions),
        ("reduced_nr_codes", "medium", reduced_codes),
        ("z4_structure", "fast", z4),
    ]


def _shift(n, s):
    from .gf2core import translate

    return translate(n, s)


def cmd_verify(cfg: RunConfig, args) -> int:
    results = {}
    for name, tier, fn in verification_suite(cfg):
        if not cfg.allows(tier):
            continue
        try:
            results[name] = bool(fn())
        except Exception as exc:  # a crash is a failed check, reported by name
            results[name] = False
            print(f"{name}: {type(exc).__name__}: {exc}", file=sys.stderr)
    text = "\n".join(f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in results.items())
    _emit(cfg, {"tier": cfg.tier, "seed": cfg.seed, "checks": results}, text)
    return 0 if all(results.values()) else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="propnr", description="Propelinear structures on the Nordstrom-Robinson code.")
    p.add_argument("--cache-dir", type=Path, default=None, help="result cache (default $PROPNR_CACHE or ~/.cache/propnr)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tier", choices=TIERS, default="fast")
    p.add_argument("--format", dest="output_format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a code and write it to a file")
    c.add_argument("target", choices=("nr", "h16", "rm", "octacode"))
    c.add_argument("params", nargs="*")
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    k = sub.add_parser("kernel", help="kernel and coset representatives of a code")
    k.add_argument("--code", help="code file (default: the NR code)")
    k.set_defaults(func=cmd_kernel)

    pa = sub.add_parser("partitions", help="partitions of H16 into NR translates")
    pa.add_argument("--base", help="code file of the base NR code")
    pa.add_argument("--verify", action="store_true", help="cross-check by brute force")
    pa.set_defaults(func=cmd_partitions)

    e = sub.add_parser("enumerate-structures", help="all structures on NR up to conjugacy (long)")
    e.add_argument("--stop-level", type=int, default=None)
    e.set_defaults(func=cmd_enumerate)

    x = sub.add_parser("extend", help="narrow extensions to H16")
    x.add_argument("--structure", help="structure file")
    x.add_argument("--all-sources", action="store_true")
    x.add_argument("--cache", help="per-source cache directory")
    x.set_defaults(func=cmd_extend)

    f = sub.add_parser("fingerprint", help="(order, centralizer order) multiset of a structure")
    f.add_argument("--structure", required=True)
    f.set_defaults(func=cmd_fingerprint)

    r = sub.add_parser("report", help="machine-readable summary")
    r.add_argument("kind", choices=("constructions", "partitions", "structures", "extensions"))
    r.add_argument("--exact-iso", action="store_true", help="also run the backtracking isomorphism test")
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", help="run the invariant checks allowed by the tier")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        jobs=args.jobs,
        cache_dir=args.cache_dir.expanduser() if args.cache_dir else default_cache_dir(),
        tier=args.tier,
        output_format=args.output_format,
        seed=args.seed,
    )
    return args.func(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
