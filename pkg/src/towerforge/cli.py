"""Command-line interface.

Exit codes: 0 success, 1 usage or domain error, 2 hypothesis refusal,
3 resource or search failure, 4 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import jsonschema

from .biquad import (BiquadField, chevalley_details, kuroda_details, relative_extension,
                     unramified_test)
from .errors import DomainError, TowerforgeError
from .gmodule import (TowerProfile, a_growth, a_invariant, canonical_group_name,
                      gs_diagnostics)
from .governing import (BASIS_ORDER, frobenius_vector, lattice_target,
                        v_group_restricted)
from .gras import build_extension, gras_details, inertia_check
from .pipeline import (PipelineConfig, augment_sigma, check_cs, cohomology_rank_check,
                       cs_compositum_rank, elimination_step, run, select_tame_set)
from .quadfield import FQ2_CONVENTION, PRIME_CONVENTION, Rationals, field_from_spec
from .tower import infer_group, tower_data

SCHEMA_VERSION = "1.0"
CONVENTIONS = {"prime_above_l": PRIME_CONVENTION, "residue_field": FQ2_CONVENTION,
               "basis_order": BASIS_ORDER}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    if text is None or text.strip() == "":
        return []
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def load_schema() -> dict:
    text = resources.files("towerforge").joinpath("report.schema.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=1)
def _validator():
    schema = load_schema()
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


def envelope(command: str, result: dict) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "command": command,
           "conventions": dict(CONVENTIONS), "result": result}
    # round trip through JSON so that tuples and keys are normalised
    doc = json.loads(json.dumps(doc, sort_keys=True, default=str))
    _validator().validate(doc)
    return doc


# --------------------------------------------------------------- commands

def cmd_gov(a):
    K = field_from_spec(a.field)
    G = v_group_restricted(K, a.primes, a.T)
    out = G.to_json()
    if not a.T:
        out["lattice_target"] = lattice_target(K, a.primes).to_json()
    return out


def cmd_frob(a):
    K = field_from_spec(a.field)
    G = v_group_restricted(K, a.split_at)
    vecs = []
    for q in a.primes:
        try:
            vecs.append(frobenius_vector(int(q), G).to_json())
        except DomainError as e:
            vecs.append({"prime": {"ell": int(q)}, "error": str(e)})
    return {"basis": [b.to_json() for b in G.basis], "vectors": vecs}


def cmd_gras(a):
    K = field_from_spec(a.field)
    T = a.ramified or a.primes
    out = gras_details(K, T, a.split_at)
    out["frobenius"] = {k: list(v) for k, v in out["frobenius"].items()}
    if out["exists"] and len(T) == 1:
        E = build_extension(K, T[0], split=a.split_at)
        out["extension"] = E.to_json() | {"label": E.label()}
        out["decomposition"] = inertia_check(E, a.split_at)
    return out


def _config(a) -> PipelineConfig:
    return PipelineConfig(bound=a.bound, prime_filter=a.filter, workers=a.threads,
                          assume_lambda=a.assume_lambda)


def cmd_eliminate(a):
    K = field_from_spec(a.field)
    group = canonical_group_name(a.target) if a.target else infer_group(K)
    td = tower_data(K, group)
    N, cert = elimination_step(K, a.split_at or a.primes, td, _config(a))
    return {"extension": N.to_json() | {"label": N.label()}, "certificate": cert.to_json()}


def cmd_run(a):
    group = a.target or "C1"
    return run(a.field, a.split_at or a.primes, group, _config(a)).to_json()


def cmd_classgroup(a):
    K = field_from_spec(a.field)
    if isinstance(K, Rationals):
        triv = {"disc": 1, "order": 1, "elementary_divisors": [], "two_part": []}
        return {"field": "Q", "wide": triv, "narrow": triv}
    out = {"field": K.label(), "wide": K.class_group().to_json(),
           "narrow": K.class_group(narrow=True).to_json()}
    if a.primes:
        out["S"] = a.primes
        out["s_class_group"] = K.s_class_group(a.primes).to_json()
    return out


def cmd_unit(a):
    K = field_from_spec(a.field)
    if isinstance(K, Rationals):
        return {"field": "Q", "generators": [{"tag": "torsion_unit", "value": "-1"}]}
    gens = [{"tag": tag, "value": str(u)} for tag, u in K.unit_generators()]
    out = {"field": K.label(), "generators": gens}
    if K.disc > 0:
        out["fundamental_unit"] = K.fundamental_unit().to_json()
    return out


def _biquad_from(text: str) -> BiquadField:
    vals = _int_list(text)
    if len(vals) == 2:
        return BiquadField.from_radicands(*vals)
    if len(vals) == 3:
        return BiquadField(*sorted(vals, key=lambda d: (abs(d), d)))
    raise DomainError("a biquadratic field is given by two radicands or three discriminants")


def cmd_kuroda(a):
    B = _biquad_from(a.field)
    return kuroda_details(B)


def _kummer(K, text: str):
    vals = [Fraction(t) for t in text.split(",")]
    if isinstance(K, Rationals):
        if len(vals) != 1:
            raise DomainError("over Q the Kummer generator is a single rational")
        return vals[0]
    return K.elt(vals[0], vals[1] if len(vals) > 1 else 0)


def cmd_chevalley(a):
    K = field_from_spec(a.field)
    if not a.kummer:
        raise DomainError("--kummer is required")
    E = relative_extension(K, _kummer(K, a.kummer))
    d = chevalley_details(E)
    ok, rep = unramified_test(E)
    return {"extension": E.label(), "ambiguous": d["ambiguous"], "t": d["t"],
            "unit_norm_index": d["unit_norm_index"], "h_base": d["h_base"],
            "convention": d["convention"], "unramified": ok, "places": rep}


def cmd_cs_check(a):
    K = field_from_spec(a.field)
    S = a.split_at or a.primes
    ok = check_cs(K, S)
    out = {"field": K.label(), "S": S, "cs": ok}
    if ok and len(S) <= 5:
        out["compositum_ranks"] = cs_compositum_rank(K, S)
    out["augmentation"] = augment_sigma(K, S)
    return out


def cmd_seq_check(a):
    return cohomology_rank_check(a.field, a.T or a.primes, a.split_at)


def cmd_diagnose(a):
    out = {}
    if a.field is not None and a.field != "":
        K = field_from_spec(a.field)
        group = canonical_group_name(a.target) if a.target else infer_group(K)
        P = TowerProfile.for_group(group, K.signature)
        out["profile"] = P.to_json()
        out["A_K"] = a_invariant(P)
        out["A_growth"] = a_growth(P)
        if a.assume_lambda is not None:
            out["lambda"], out["lambda_source"] = a.assume_lambda, "override"
        else:
            td = tower_data(K, group)
            out["lambda"], out["lambda_source"] = td.lam, "computed"
            out["tower"] = td.to_json()
        out["hypothesis_A_ge_h1"] = out["A_K"] >= P.h1
        d = P.h1 if a.d is None else a.d
        r = P.h2 if a.r is None else a.r
        r1, r2 = K.signature
    else:
        if a.d is None or a.r is None:
            raise DomainError("diagnose needs --field or both --d and --r")
        d, r, r1, r2 = a.d, a.r, a.r1, a.r2
    s = len(a.split_at or a.primes) if a.s is None else a.s
    out["gs"] = gs_diagnostics(d, r, r1, r2, s)
    return out


def cmd_select_tame(a):
    return select_tame_set(a.field, a.n, bound=a.bound, assume_lambda=a.assume_lambda)


COMMANDS = {
    "gov": (cmd_gov, "governing group V_K^S (optionally restricted at T)"),
    "frob": (cmd_frob, "Frobenius vectors of primes on V_K^S"),
    "gras": (cmd_gras, "existence (and construction) of a Z/2-extension ramified at T"),
    "eliminate": (cmd_eliminate, "one elimination step with certificate"),
    "run": (cmd_run, "full split-elimination pipeline"),
    "classgroup": (cmd_classgroup, "class groups (wide or narrow) and S-class groups"),
    "unit": (cmd_unit, "unit group generators"),
    "kuroda": (cmd_kuroda, "class number of a biquadratic field"),
    "chevalley": (cmd_chevalley, "ambiguous class count of K(sqrt x)/K"),
    "cs-check": (cmd_cs_check, "condition C_S and compositum ranks"),
    "seq-check": (cmd_seq_check, "exact-sequence rank check"),
    "diagnose": (cmd_diagnose, "tower invariants with Golod-Shafarevich and Shafarevich-Koch checks"),
    "select-tame": (cmd_select_tame, "tame primes hitting free basis elements"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--field", default="Q", help='m for Q(sqrt m), "D=<disc>", or Q')
    common.add_argument("--primes", type=_int_list, default=[], help="comma-separated primes")
    common.add_argument("--bound", type=int, default=10 ** 6, help="prime scan bound")
    common.add_argument("--filter", default="auto", choices=["auto", "any", "inert", "degree1"])
    common.add_argument("--format", default="text", choices=["text", "json"])
    common.add_argument("--assume-lambda", type=int, default=None)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--split-at", type=_int_list, default=[], help="the set S")
    common.add_argument("--ramified", type=_int_list, default=[], help="the set T")
    common.add_argument("--T", type=_int_list, default=[], help="tame set T")
    common.add_argument("--target", default=None, help="tower group (C1, C2, V4, C4, Q8, D4)")
    common.add_argument("--kummer", default=None, help="a or a,b for a + b sqrt m")
    common.add_argument("--n", type=int, default=1)
    for name in ("d", "r", "s"):
        common.add_argument(f"--{name}", type=int, default=None)
    common.add_argument("--r1", type=int, default=1)
    common.add_argument("--r2", type=int, default=0)
    p = _Parser(prog="towerforge", description="2-class field towers and split elimination")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return p


def _text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(f"{pad}{_scalar(obj)}")
    return lines


def _flat(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{}"
    if v is None:
        return "-"
    return str(v)


def _headline(command: str, res: dict) -> str | None:
    if command == "gras":
        if res["exists"]:
            ext = res.get("extension")
            return f"exists: {ext['label']}" if ext else "exists"
        return "does not exist"
    if command == "run":
        return f"m = {res['m']}, final field {res['final_field']}"
    if command == "diagnose" and res["gs"].get("infinite_tower_flag"):
        return "Golod-Shafarevich violated: infinite-tower flag raised"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    fn = COMMANDS[a.command][0]
    try:
        result = fn(a)
        doc = envelope(a.command, result)
    except TowerforgeError as e:
        payload = {"error": type(e).__name__, "message": str(e),
                   "exit_code": e.exit_code, "stage": getattr(e, "stage", None)}
        stats = getattr(e, "stats", None)
        if stats:
            payload["stats"] = stats
        if a.format == "json":
            print(json.dumps(payload, sort_keys=True, default=str))
        print(f"towerforge {a.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    if a.format == "json":
        print(json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        head = _headline(a.command, doc["result"])
        if head:
            print(head)
        print("\n".join(_text(doc["result"])))
    return 0


if __name__ == "__main__":
    sys.exit(main())
