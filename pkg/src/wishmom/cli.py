"""Command-line front end.

Reads a JSON parameter file (or stdin when the path is "-"), dispatches to
the engines, and prints one machine-readable document.  Output is
deterministic for fixed inputs and seed: keys are sorted, floats carry 17
significant digits, complex values are {"re": .., "im": ..} objects, and
every document embeds the convention, the SHA-256 of the input bytes, and
the library version.

Exit codes: 0 success, 2 validation error, 3 numerical error, 4 budget
exceeded.

Input schema:
    {"n": number,
     "sigma": {"re": [[..]], "im": [[..]]},     # "im" optional (zeros)
     "m_matrix": {..},                          # optional
     "h": [matrix, ..],                         # optional, for joint commands
     "index": [i1, .., im],                     # optional, multi-index
     "convention": "paper" | "standard"}        # optional, default "paper"
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys

import numpy as np

from . import __version__, applications, matrix_core, mc, model, multivariate, univariate
from .combinatorics import CyclePermutation, necklace_rotations, necklaces_of_kind
from .errors import BudgetExceededError, NumericalError, ValidationError, WishmomError

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_BUDGET = 4


# ---------------------------------------------------------------------------
# canonical JSON / CSV emission
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValidationError("non-finite value in output")
    s = format(float(x), ".17g")
    return s if ("." in s or "e" in s or "E" in s) else s + ".0"


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    out = io.StringIO()

    def emit(o):
        if isinstance(o, dict):
            out.write("{")
            for k, key in enumerate(sorted(o)):
                if k:
                    out.write(",")
                out.write(json.dumps(str(key)))
                out.write(":")
                emit(o[key])
            out.write("}")
        elif isinstance(o, (list, tuple)):
            out.write("[")
            for k, v in enumerate(o):
                if k:
                    out.write(",")
                emit(v)
            out.write("]")
        elif isinstance(o, bool) or o is None:
            out.write(json.dumps(o))
        elif isinstance(o, (int, np.integer)):
            out.write(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            out.write(_fmt_float(float(o)))
        elif isinstance(o, str):
            out.write(json.dumps(o))
        else:
            raise ValidationError(f"cannot serialize {type(o).__name__}")

    emit(obj)
    return out.getvalue()


def _cnum(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _csv_table(rows: list[dict]) -> str:
    """CSV with a mandatory header; complex values arrive pre-flattened."""
    if not rows:
        return "\n"
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            cells.append(_fmt_float(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _flatten_complex(rows: list[dict]) -> list[dict]:
    out = []
    for row in rows:
        flat = {}
        for k, v in row.items():
            if isinstance(v, dict) and set(v) == {"re", "im"}:
                flat[k + "_re"] = v["re"]
                flat[k + "_im"] = v["im"]
            else:
                flat[k] = v
        out.append(flat)
    return out


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------

def _read_input(path: str) -> tuple[dict, str]:
    if path == "-":
        raw = sys.stdin.buffer.read()
    else:
        try:
            with open(path, "rb") as f:
                raw = f.read()
        except OSError as exc:
            raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed JSON input: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("input document must be a JSON object")
    return doc, hashlib.sha256(raw).hexdigest()


def _matrix_from(obj, name: str) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise ValidationError(f"{name} must be an object with a 're' matrix")
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ValidationError(f"{name}: re/im shapes differ")
    return re + 1j * im


def _params_from(doc: dict, convention: str | None) -> model.WishartParams:
    if "n" not in doc or "sigma" not in doc:
        raise ValidationError("input needs 'n' and 'sigma'")
    conv = convention or doc.get("convention", "paper")
    sigma = _matrix_from(doc["sigma"], "sigma")
    m_matrix = _matrix_from(doc["m_matrix"], "m_matrix") if "m_matrix" in doc else None
    params, _ = model.build(doc["n"], sigma, m_matrix, conv)
    return params


def _h_list(doc: dict, params) -> list[np.ndarray]:
    hs = doc.get("h")
    if not hs:
        raise ValidationError("this command needs an 'h' list of direction matrices")
    return [_matrix_from(hk, f"h[{k}]") for k, hk in enumerate(hs)]


def _index_from(doc: dict, args) -> tuple[int, ...]:
    if args.index is not None:
        return tuple(int(v) for v in args.index.split(","))
    if "index" in doc:
        return tuple(int(v) for v in doc["index"])
    raise ValidationError("this command needs --index or an 'index' entry")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_moments(doc, args):
    params = _params_from(doc, args.convention)
    rows = [{"order": k, "value": _cnum(univariate.noncentral_moment(params, k))}
            for k in range(1, args.order + 1)]
    return params.convention, {"orders": rows}


def _cmd_cumulants(doc, args):
    params = _params_from(doc, args.convention)
    rows = [{"order": k, "value": _cnum(univariate.noncentral_cumulant(params, k))}
            for k in range(1, args.order + 1)]
    return params.convention, {"orders": rows}


def _cmd_joint_moments(doc, args):
    params = _params_from(doc, args.convention)
    h = _h_list(doc, params)
    index = _index_from(doc, args)
    value = multivariate.joint_moment(params, h, index)
    return params.convention, {"index": list(index), "value": _cnum(value)}


def _cmd_joint_cumulants(doc, args):
    params = _params_from(doc, args.convention)
    h = _h_list(doc, params)
    index = _index_from(doc, args)
    value = multivariate.joint_cumulant(params, h, index)
    return params.convention, {"index": list(index), "value": _cnum(value)}


def _cmd_generalized(doc, args):
    params = _params_from(doc, args.convention)
    h = _h_list(doc, params)
    images = _index_from(doc, args)  # one-line permutation images
    perm = CyclePermutation.from_images(images)
    expansion = multivariate.generalized_moment_expansion(params, h, perm)
    terms = []
    for term in expansion.terms:
        terms.append({
            "factors": [{
                "assignment": f.assignment,
                "cycle": list(f.cycle),
                "value": None if f.symbolic else _cnum(f.value),
            } for f in term.factors],
            "value": None if term.symbolic else _cnum(term.value),
        })
    return params.convention, {
        "permutation": list(images),
        "evaluated_sum": _cnum(expansion.evaluated_sum),
        "fully_evaluated": expansion.fully_evaluated,
        "symbolic_factor_count": len(expansion.symbolic_factors),
        "terms": terms,
    }


def _cmd_permanent(doc, args):
    if "sigma" not in doc:
        raise ValidationError("permanent needs the matrix in 'sigma'")
    y = _matrix_from(doc["sigma"], "sigma")
    d = complex(args.d) if args.d is not None else 1 + 0j
    if args.index is not None or "index" in doc:
        index = _index_from(doc, args)
        value = applications.permanent_master(y, index, d)
        result = {"route": "master", "index": list(index), "value": _cnum(value)}
    else:
        value = applications.permanent_d(y, d)
        result = {"route": "brute-force", "value": _cnum(value)}
    result["d"] = _cnum(d)
    return doc.get("convention", "paper"), result


def _cmd_polykay(doc, args):
    if "sigma" not in doc:
        raise ValidationError("polykay needs a Hermitian matrix in 'sigma'")
    x = _matrix_from(doc["sigma"], "sigma")
    if not matrix_core.is_hermitian(x):
        raise ValidationError("polykay needs a Hermitian matrix")
    vals, _ = matrix_core.hermitian_eigen(x)
    sample = applications.PolykaySample.from_eigenvalues(vals)
    rows = [{"order": k, "value": applications.polykay(sample, k)}
            for k in range(1, args.order + 1)]
    return doc.get("convention", "paper"), {
        "eigenvalues": [float(v) for v in vals],
        "orders": rows,
    }


def _cmd_necklaces(doc, args):
    if args.kind is None:
        raise ValidationError("necklaces needs --kind i1,i2,...")
    kind = tuple(int(v) for v in args.kind.split(","))
    rows = []
    for neck in necklaces_of_kind(kind):
        rows.append({
            "representative": neck.word,
            "block_length": neck.block_length,
            "repetitions": neck.repetitions,
            "lyndon": neck.is_lyndon,
            "rotations": ["".join(str(s) for s in rot)
                          for rot in necklace_rotations(neck)],
        })
    return doc.get("convention", "paper"), {"kind": list(kind), "necklaces": rows}


def _cmd_mc_verify(doc, args):
    params = _params_from(doc, "standard")
    stream = mc.RngStream(args.seed, 0)
    n2 = args.n2 if args.n2 is not None else int(params.n)
    if args.identity == "df-additivity":
        p1, _ = model.build(params.n, params.sigma, None, "standard")
        p2, _ = model.build(n2, params.sigma, None, "standard")
    elif args.identity == "sheffer":
        p1, _ = model.build(params.n, params.sigma, params.m_matrix, "standard")
        p2, _ = model.build(n2, params.sigma, None, "standard")
    else:  # m-split, half of M on each block
        p1, _ = model.build(params.n, params.sigma, params.m_matrix / 2, "standard")
        p2, _ = model.build(n2, params.sigma, params.m_matrix / 2, "standard")
    report = mc.distribution_identity_check(p1, p2, args.identity, args.samples, stream)
    return "standard", report


_COMMANDS = {
    "moments": (_cmd_moments, True),
    "cumulants": (_cmd_cumulants, True),
    "joint-moments": (_cmd_joint_moments, True),
    "joint-cumulants": (_cmd_joint_cumulants, True),
    "generalized": (_cmd_generalized, True),
    "permanent": (_cmd_permanent, True),
    "polykay": (_cmd_polykay, True),
    "necklaces": (_cmd_necklaces, False),
    "mc-verify": (_cmd_mc_verify, True),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wishmom",
        description="Trace moments and cumulants of complex Wishart matrices.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("params_file", nargs="?", default=None,
                        help="JSON parameter file, or - for stdin")
    parser.add_argument("--order", type=int, default=3,
                        help="highest order for scalar sequences (default 3)")
    parser.add_argument("--index", default=None,
                        help="comma-separated multi-index (or permutation images)")
    parser.add_argument("--kind", default=None,
                        help="necklace kind, comma-separated symbol counts")
    parser.add_argument("--d", default=None,
                        help="permanent parameter d, python complex syntax")
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--identity", choices=mc.IDENTITIES, default="sheffer")
    parser.add_argument("--n2", type=int, default=None,
                        help="second block size for mc-verify (default: n)")
    parser.add_argument("--convention", choices=model.CONVENTIONS, default=None,
                        help="override the input file's convention")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def run(argv) -> tuple[int, str]:
    """Execute a job; returns (exit_code, output_document)."""
    args = _build_parser().parse_args(argv)
    handler, needs_file = _COMMANDS[args.command]
    try:
        if needs_file:
            if args.params_file is None:
                raise ValidationError(f"{args.command} needs a params file")
            doc, digest = _read_input(args.params_file)
        elif args.params_file is not None:
            doc, digest = _read_input(args.params_file)
        else:
            doc, digest = {}, None
        convention, results = handler(doc, args)
        envelope = {
            "command": args.command,
            "convention": convention,
            "input_sha256": digest,
            "library_version": __version__,
            "results": results,
        }
        if args.command == "mc-verify":
            envelope["seed"] = args.seed
        if args.format == "csv":
            rows = _rows_for_csv(args.command, results)
            for row in rows:
                row["convention"] = convention
            return 0, _csv_table(_flatten_complex(rows))
        return 0, canonical_json(envelope) + "\n"
    except BudgetExceededError as exc:
        return EXIT_BUDGET, f"budget exceeded: {exc}\n"
    except NumericalError as exc:
        return EXIT_NUMERICAL, f"numerical error: {type(exc).__name__}: {exc}\n"
    except (ValidationError, WishmomError) as exc:
        return EXIT_VALIDATION, f"validation error: {exc}\n"


def _rows_for_csv(command: str, results: dict) -> list[dict]:
    if "orders" in results:
        rows = []
        for row in results["orders"]:
            flat = {"order": row["order"]}
            v = row["value"]
            flat["value"] = v if isinstance(v, float) else v
            rows.append(flat)
        return rows
    if command == "necklaces":
        return [{k: row[k] for k in ("representative", "block_length", "repetitions")}
                for row in results["necklaces"]]
    if "value" in results:
        return [{"value": results["value"]}]
    raise ValidationError(f"no CSV table defined for {command}")


def main(argv=None) -> int:
    code, output = run(sys.argv[1:] if argv is None else argv)
    if code == 0:
        sys.stdout.write(output)
    else:
        sys.stderr.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
