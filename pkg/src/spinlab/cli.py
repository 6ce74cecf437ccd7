"""Config-driven experiment runner and command line interface.

Experiments are described by nested key-value tables (TOML files or the
built-in presets), executed deterministically, and reported as a JSON bundle
of bound reports and residual suites, a CSV spectrum table, and a plain-text
summary.  The exit status is nonzero exactly when an asserted invariant
fails; a bound whose hypothesis does not hold is reported, not an error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import bounds as bounds_mod
from . import clifford, models, operators
from .spectral import FourierScalar

SCHEMA_VERSION = 1
OUT_ENV = "SPINLAB_OUT"
DEFAULT_OUT = "spinlab-out"

MARGIN_TOL = 1e-9


def _fmt(x):
    return f"{float(x):.12g}"


def build_split(m, n, parity_m=0, parity_n=0):
    rep_m = clifford.build_rep(m, parity_m)
    rep_n = clifford.build_rep(n, parity_n)
    return clifford.tensor_construct(rep_m, rep_n)


def scalar_from_spec(spec, lengths):
    if spec is None:
        return FourierScalar.zero(lengths)
    if np.isscalar(spec):
        return FourierScalar.constant(float(spec), lengths)
    kind = spec.get("type", "zero")
    if kind == "zero":
        return FourierScalar.zero(lengths)
    if kind == "constant":
        return FourierScalar.constant(float(spec["value"]), lengths)
    if kind == "cosine":
        return FourierScalar.cosine(
            float(spec.get("amplitude", 1.0)),
            int(spec.get("axis", 0)),
            lengths,
            harmonic=int(spec.get("harmonic", 1)),
        )
    raise ValueError(f"unknown scalar spec type {kind!r}")


def model_from_spec(spec):
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "aux-torus":
        m = int(spec.get("m"))
        lengths = tuple(spec.get("lengths", (1.0,) * m))
        fspec = spec.pop("f", None)
        spec["f"] = scalar_from_spec(fspec, lengths)
        if "holonomy" in spec:
            spec["holonomy"] = np.asarray(spec["holonomy"], dtype=float)
    return models.build_model(kind, **spec)


# ---------------------------------------------------------------------------
# experiment pipelines


def run_algebra_suite(max_dim=8, tol=clifford.ALGEBRA_TOL):
    """Identity residuals for every split with m + n <= max_dim, covering
    both representation classes of each odd factor."""
    rows = []
    failures = []
    for m in range(1, max_dim):
        for n in range(1, max_dim - m + 1):
            jms = (0, 1) if m % 2 == 1 else (None,)
            jns = (0, 1) if n % 2 == 1 else (None,)
            for jm in jms:
                for jn in jns:
                    split = build_split(m, n, jm or 0, jn or 0)
                    res = clifford.verify_identities(split)
                    worst = max(res.values())
                    rows.append(
                        {
                            "m": m,
                            "n": n,
                            "class_m": jm,
                            "class_n": jn,
                            "max_residual": worst,
                        }
                    )
                    if worst > tol:
                        failures.append(
                            f"algebra residual {worst:.3e} at (m={m}, n={n},"
                            f" classes {jm}/{jn})"
                        )
    return {"rows": rows, "failures": failures}


def spectrum_rows(spec, label):
    rows = []
    for pair in spec.pairs:
        mode = (
            ";".join(_fmt(k) for k in pair.mode)
            if pair.mode is not None
            else ""
        )
        coeff = float(np.max(np.abs(pair.field.coeffs)))
        rows.append(
            {
                "model": label,
                "operator": spec.tag,
                "mode": mode,
                "eigenvalue": pair.value,
                "coeff_max": coeff,
            }
        )
    return rows


def torus_experiment(cfg):
    """Submanifold-operator pipeline on an embedded torus model."""
    model = model_from_spec(cfg["model"])
    split_cfg = cfg.get("split", {})
    split = build_split(
        model.m,
        model.n,
        split_cfg.get("parity_m", 0),
        split_cfg.get("parity_n", 0),
    )
    kmax = int(cfg.get("operators", {}).get("truncation", 8))
    label = model.label()
    failures = []
    residuals = {}

    op = operators.assemble_DH(model, split, kmax)
    spec = operators.spectrum(op)
    rows = spectrum_rows(spec, label)

    residuals.update(operators.structural_residuals(model, split, kmax))
    residuals["gauss_formula_fd"] = models.gauss_formula_residual(model)
    try:
        residuals["parallel_gauss"] = operators.parallel_gauss_residual(
            model, split
        )
    except ValueError:
        pass
    lich = max(
        operators.lichnerowicz_residual(p.field, model, split)
        for p in spec.lowest(12)
    )
    residuals["lichnerowicz"] = lich

    tol = cfg.get("tolerances", {})
    for name, cap in (
        ("hermiticity", tol.get("hermiticity", 1e-12)),
        ("square_identity", tol.get("square_identity", 1e-10)),
        ("twisted_relation", tol.get("twisted_relation", 1e-12)),
        ("gauss_formula_fd", tol.get("gauss_formula_fd", 1e-6)),
        ("parallel_gauss", tol.get("parallel_gauss", 1e-10)),
        ("lichnerowicz", tol.get("lichnerowicz", 1e-9)),
    ):
        if name in residuals and residuals[name] > cap:
            failures.append(
                f"{label}: {name} residual {residuals[name]:.3e} > {cap:g}"
            )

    reports = []
    kinds = cfg.get("bounds", {}).get("kinds", ["energy-momentum"])
    margin_tol = tol.get("margin", MARGIN_TOL)
    for kind in kinds:
        for pair in spec.pairs:
            rep = bounds_mod.evaluate_bound(
                kind, model, split, pair.value, fld=pair.field
            )
            reports.append(rep)
            if rep.hypothesis_ok and rep.margin < -margin_tol:
                failures.append(
                    f"{label}: {kind} bound violated by {rep.margin:.3e} at"
                    f" eigenvalue {_fmt(pair.value)}"
                )

    ident = cfg.get("identity", {})
    q_killing = ident.get("q_killing", [])
    q_em = ident.get("q_em", [])
    n_pairs = int(ident.get("pairs", 3))
    if q_killing or q_em:
        ident_tol = tol.get("identity", 1e-9)
        lowest = spec.lowest(n_pairs)
        worst_res = 0.0
        worst_deficit = 0.0
        for pair in lowest:
            for q in q_killing:
                out = bounds_mod.connection_identity_residual(
                    "killing", model, split, pair.value, pair.field, q
                )
                worst_res = max(worst_res, out["residual"])
            for q in q_em:
                out = bounds_mod.connection_identity_residual(
                    "energy-momentum", model, split, pair.value, pair.field, q
                )
                worst_res = max(worst_res, out["residual"])
                worst_deficit = min(worst_deficit, out["deficit_min"])
        residuals["identity"] = worst_res
        residuals["deficit_min"] = worst_deficit
        if worst_res > ident_tol:
            failures.append(
                f"{label}: identity residual {worst_res:.3e} > {ident_tol:g}"
            )
        if worst_deficit < -1e-12:
            failures.append(
                f"{label}: negative Cauchy-Schwarz deficit {worst_deficit:.3e}"
            )

    return {
        "label": cfg.get("label", label),
        "reports": reports,
        "spectrum": rows,
        "residuals": residuals,
        "failures": failures,
    }


def sphere_equality_experiment(cfg=None):
    """Closed-form equality chain on the unit sphere."""
    cfg = cfg or {}
    radius = float(cfg.get("model", {}).get("radius", 1.0))
    parity_n = int(cfg.get("split", {}).get("parity_n", 0))
    model = models.SphereModel(2, radius)
    split = build_split(2, 1, 0, parity_n)
    d = split.fiber_dim
    psi0 = np.zeros(d, dtype=complex)
    psi0[0] = 1.0
    fld = model.parallel_spinor(split, psi0)
    s = bounds_mod.sample_field(fld, model, split)
    failures = []
    residuals = {}

    # submanifold operator annihilates the field (via the twisted relation)
    tw = np.zeros_like(s.values)
    for i in range(2):
        tw += np.einsum("gf,pf->pg", split.tangent_action[i], s.derivs[i])
    half = 0.5 * operators._gamma_mean_curvature(model, split) @ split.omega_perp
    dh_vals = tw + np.einsum("gf,pf->pg", half, s.values)
    residuals["dirac_kernel"] = float(
        np.max(np.abs(dh_vals)) / np.sqrt(np.max(s.density))
    )

    residuals["parallel_transport_fd"] = (
        models.restricted_parallel_transport_residual(model, split, fld)
    )
    residuals["gauss_formula_fd"] = models.gauss_formula_residual(model)

    em = bounds_mod.energy_momentum(s)
    half_metric = 0.5 * np.eye(2)
    residuals["em_shape"] = float(
        np.max(np.abs(em.q - half_metric[None, :, :]))
    )
    residuals["em_norm"] = float(np.max(np.abs(em.norm_sq - 0.5)))

    rep = bounds_mod.evaluate_bound(
        "genus-zero", model, split, 0.0, sampled=s
    )
    residuals["genus_zero_rhs"] = abs(rep.rhs)
    residuals["genus_zero_margin"] = abs(rep.margin)

    lim = bounds_mod.limiting_case_residuals(
        s, 0.0, include=("killing", "alignment", "em", "norm",
                         "integrability")
    )
    residuals["killing"] = lim["killing"]
    residuals["killing_mu_abs_defect"] = abs(lim["killing_mu_abs"] - radius**-1)
    residuals["alignment"] = lim["alignment"]
    residuals["norm_constancy"] = lim["norm_constancy"]
    residuals["em_equation"] = lim["em"]
    residuals["q_tracefree"] = lim["q_tracefree_deviation"]

    lich = operators.lichnerowicz_residual  # sphere handled in closed form
    dpsi = fld.apply_dirac()
    d2 = dpsi.apply_dirac()
    pts = s.points
    lhs = np.real(
        np.einsum("pf,pf->p", np.conjugate(d2.values(pts)), fld.values(pts))
    )
    grad = sum(
        np.sum(np.abs(fld.cov_derivs(pts)[i]) ** 2, axis=-1) for i in range(2)
    )
    rterm = 0.25 * model.scalar_curvature * s.density
    residuals["lichnerowicz"] = float(
        np.max(np.abs(lhs - grad - rterm))
        / (np.max(np.abs(lhs)) + 1e-300)
    )

    tolmap = {
        "dirac_kernel": 1e-10,
        "parallel_transport_fd": 1e-10,
        "gauss_formula_fd": 1e-6,
        "em_shape": 1e-10,
        "em_norm": 1e-10,
        "genus_zero_rhs": 1e-10,
        "genus_zero_margin": 1e-10,
        "killing": 1e-10,
        "killing_mu_abs_defect": 1e-10,
        "alignment": 1e-10,
        "norm_constancy": 1e-12,
        "em_equation": 1e-10,
        "lichnerowicz": 1e-9,
    }
    for name, cap in tolmap.items():
        if residuals[name] > cap:
            failures.append(
                f"sphere: {name} residual {residuals[name]:.3e} > {cap:g}"
            )

    return {
        "label": cfg.get("label", model.label()),
        "reports": [rep],
        "spectrum": [],
        "residuals": residuals,
        "failures": failures,
    }


def aux_experiment(cfg):
    """Modified twisted operator pipeline on an auxiliary-bundle torus."""
    model = model_from_spec(cfg["model"])
    split_cfg = cfg.get("split", {})
    split = build_split(
        model.m, model.n,
        split_cfg.get("parity_m", 0), split_cfg.get("parity_n", 0),
    )
    kmax = int(cfg.get("operators", {}).get("truncation", 4))
    label = model.label()
    failures = []
    residuals = {}

    op = operators.assemble_Df(model, split, kmax)
    residuals["hermiticity"] = op.hermiticity_defect()
    if residuals["hermiticity"] > 1e-12:
        failures.append(f"{label}: modified operator not Hermitian")
    spec = operators.spectrum(op)
    rows = spectrum_rows(spec, label)

    f = model.potential
    if all(b == 0 for b in f.band):
        c = float(f.coeffs.reshape(-1)[0].real)
        base = operators.spectrum(
            operators.assemble_twisted(model, split, kmax)
        )
        shift = np.sort(base.values - 0.5 * c)
        got = np.sort(spec.values)
        residuals["constant_shift"] = float(np.max(np.abs(shift - got)))
        if residuals["constant_shift"] > 1e-12:
            failures.append(f"{label}: constant-potential shift failed")

    # both signs of the twisted multiplication are exposed; record how far
    # the two spectra drift apart (observational, never asserted)
    flipped = operators.spectrum(
        operators.assemble_Df(model, split, kmax, mult_sign=-model.mult_sign)
    )
    residuals["mult_sign_spectrum_gap"] = float(
        np.max(
            np.abs(
                np.sort(np.abs(spec.values))
                - np.sort(np.abs(flipped.values))
            )
        )
    )

    reports = []
    kinds = cfg.get("bounds", {}).get(
        "kinds", ["aux-curvature", "aux-energy-momentum"]
    )
    margin_tol = cfg.get("tolerances", {}).get("margin", MARGIN_TOL)
    max_pairs = int(cfg.get("bounds", {}).get("max_pairs", 0)) or len(
        spec.pairs
    )
    for kind in kinds:
        for pair in spec.lowest(max_pairs):
            rep = bounds_mod.evaluate_bound(
                kind, model, split, pair.value, fld=pair.field
            )
            reports.append(rep)
            if rep.hypothesis_ok and rep.margin < -margin_tol:
                failures.append(
                    f"{label}: {kind} bound violated at"
                    f" eigenvalue {_fmt(pair.value)}"
                )

    return {
        "label": cfg.get("label", label),
        "reports": reports,
        "spectrum": rows,
        "residuals": residuals,
        "failures": failures,
    }


def conformal_experiment(cfg=None):
    """Covariance and scaling checks under a regular conformal change."""
    cfg = cfg or {}
    kmax = int(cfg.get("operators", {}).get("truncation", 16))
    amplitude = float(cfg.get("conformal", {}).get("amplitude", 0.1))
    model = models.FlatTorusModel(2, 1)
    split = build_split(2, 1)
    u = FourierScalar.cosine(amplitude, 0, model.lengths)
    conf = models.ConformalData(u)
    m = split.m
    failures = []
    residuals = {}

    rng = np.random.default_rng(11)
    fld = operators.FourierSpinorField.zero(
        model.lengths, model.spin_delta, kmax, split.fiber_dim
    )
    inner = kmax // 2
    shape = fld.coeffs.shape
    sub = tuple(slice(kmax - inner, kmax + inner + 1) for _ in range(m))
    block = rng.standard_normal(
        (2 * inner + 1,) * m + (split.fiber_dim,)
    ) + 1j * rng.standard_normal((2 * inner + 1,) * m + (split.fiber_dim,))
    fld.coeffs[sub + (slice(None),)] = block

    def rel(a, b):
        diff = a - b
        return float(
            np.sqrt(diff.l2_norm_sq())
            / (np.sqrt(a.l2_norm_sq()) + np.sqrt(b.l2_norm_sq()) + 1e-300)
        )

    chi = operators.conformal_transport(fld, conf, -(m - 1) / 2.0)
    lhs = operators.apply_conformal_dirac(chi, conf, model, split)
    rhs = operators.conformal_transport(
        operators.apply_dirac(fld, model, split), conf, -(m + 1) / 2.0
    )
    residuals["dirac_covariance"] = rel(lhs, rhs)

    lhs_h = operators.apply_conformal_DH(chi, conf, model, split)
    dh_apply = operators.apply_dirac(fld, model, split).fiber_map(
        ((-1.0) ** split.n) * split.omega_perp
    )
    rhs_h = operators.conformal_transport(dh_apply, conf, -(m + 1) / 2.0)
    residuals["submanifold_covariance"] = rel(lhs_h, rhs_h)

    # energy-momentum scaling for an eigenfield of the flat operator
    op = operators.assemble_DH(model, split, 2)
    pair = [p for p in operators.spectrum(op).pairs if abs(p.value) > 0.1][0]
    psi = pair.field
    phi = operators.conformal_transport(psi, conf, -(m - 1) / 2.0)
    n_grid = 4 * (phi.kmax + u.band[0]) + 5
    pts_axes = [np.arange(n_grid) * (L / n_grid) for L in model.lengths]
    mesh = np.meshgrid(*pts_axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    vol = model.volume
    weights = np.full(pts.shape[0], vol / pts.shape[0])

    vals = phi.on_grid(n_grid).reshape(-1, split.fiber_dim)
    ders = np.stack(
        [
            operators.conformal_cov_deriv(phi, conf, model, split, ax)
            .on_grid(n_grid)
            .reshape(-1, split.fiber_dim)
            for ax in range(m)
        ],
        axis=0,
    )
    sampled_bar = bounds_mod.SampledField(
        vals, ders, weights, pts, model, split
    )
    em_bar = bounds_mod.energy_momentum(sampled_bar)
    sampled = bounds_mod.sample_field(psi, model, split, grid_n=n_grid)
    em = bounds_mod.energy_momentum(sampled)
    e2u = np.exp(2.0 * np.real(u.evaluate_points(pts)))
    residuals["em_scaling"] = float(
        np.max(np.abs(em_bar.norm_sq - em.norm_sq / e2u))
        / (np.max(np.abs(em.norm_sq)) + 1e-300)
    )

    rng2 = np.random.default_rng(3)
    probe = model.chart_samples(rng2, 12)
    rbar = models.conformal_scalar_curvature(model, conf)
    fd = models.metric_scalar_curvature_fd(u, model.lengths, probe)
    residuals["conformal_curvature_fd"] = float(
        np.max(np.abs(np.real(rbar.evaluate_points(probe)) - fd))
    )

    tolmap = {
        "dirac_covariance": 1e-6,
        "submanifold_covariance": 1e-6,
        "em_scaling": 1e-6,
        "conformal_curvature_fd": 1e-5,
    }
    for name, cap in tolmap.items():
        if residuals[name] > cap:
            failures.append(
                f"conformal: {name} residual {residuals[name]:.3e} > {cap:g}"
            )

    return {
        "label": cfg.get("label", "conformal-covariance"),
        "reports": [],
        "spectrum": [],
        "residuals": residuals,
        "failures": failures,
    }


def synthetic_experiment(cfg=None):
    """Random admissible normal-curvature draws: Hermiticity, the Rayleigh
    lower bound, and monotonicity of the two curvature bounds."""
    cfg = cfg or {}
    draws = int(cfg.get("synthetic", {}).get("draws", 100))
    dims = cfg.get("synthetic", {}).get("dims", [[2, 2], [3, 2]])
    seed = int(cfg.get("synthetic", {}).get("seed", 0))
    rng = np.random.default_rng(seed)
    failures = []
    residuals = {"hermiticity": 0.0, "rayleigh_defect": 0.0,
                 "monotonicity_defect": 0.0}

    for m, n in dims:
        split = build_split(m, n)
        d = split.fiber_dim
        for _ in range(draws):
            curv = bounds_mod.random_normal_curvature(m, n, rng)
            op = curv.fiber_operator(split)
            residuals["hermiticity"] = max(
                residuals["hermiticity"],
                float(np.max(np.abs(op - op.conj().T))),
            )
            k1 = bounds_mod.kappa1(curv, split)
            vecs = rng.standard_normal((draws, d)) + 1j * rng.standard_normal(
                (draws, d)
            )
            dens = np.sum(np.abs(vecs) ** 2, axis=-1)
            ray = np.real(
                np.einsum("pf,gf,pg->p", np.conjugate(vecs), op, vecs)
            ) / dens
            residuals["rayleigh_defect"] = max(
                residuals["rayleigh_defect"], float(np.max(k1 - ray))
            )
            # bound comparison on shared data, hypothesis enforced
            hnorm = float(rng.random() + 0.5)
            R = abs(k1) + (m - 1) / m * hnorm**2 + 1.0
            rn_vals = ray
            rhs12 = 0.25 * np.min(
                (np.sqrt(m / (m - 1) * (R + rn_vals)) - hnorm) ** 2
            )
            rhs17 = 0.25 * (np.sqrt(m / (m - 1) * (R + k1)) - hnorm) ** 2
            residuals["monotonicity_defect"] = max(
                residuals["monotonicity_defect"], float(rhs17 - rhs12)
            )

    if residuals["hermiticity"] > 1e-12:
        failures.append("synthetic: curvature endomorphism not Hermitian")
    if residuals["rayleigh_defect"] > 1e-10:
        failures.append("synthetic: Rayleigh quotient dipped below kappa_1")
    if residuals["monotonicity_defect"] > 1e-12:
        failures.append("synthetic: bound monotonicity violated")
    return {
        "label": cfg.get("label", "synthetic-curvature"),
        "reports": [],
        "spectrum": [],
        "residuals": residuals,
        "failures": failures,
    }


# ---------------------------------------------------------------------------
# rendering and persistence


def report_render(reports):
    """Deterministic text table; numbers carry 12 significant digits."""
    header = (
        "bound_kind",
        "model",
        "eigenvalue",
        "lambda_sq",
        "hyp",
        "rhs",
        "margin",
    )
    lines = ["\t".join(header)]
    ordered = sorted(
        reports, key=lambda r: (r.bound_kind, r.model_label, r.eigenvalue)
    )
    for r in ordered:
        lines.append(
            "\t".join(
                [
                    r.bound_kind,
                    r.model_label,
                    _fmt(r.eigenvalue),
                    _fmt(r.lambda_sq),
                    "ok" if r.hypothesis_ok else "n/a",
                    _fmt(r.rhs),
                    _fmt(r.margin),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_outputs(result, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    label = result["label"].replace("/", "_")
    bundle = {
        "schema_version": SCHEMA_VERSION,
        "label": result["label"],
        "reports": [
            r.as_dict()
            for r in sorted(
                result["reports"],
                key=lambda r: (r.bound_kind, r.model_label, r.eigenvalue),
            )
        ],
        "residuals": {
            k: float(v) for k, v in sorted(result["residuals"].items())
        },
        "failures": sorted(result["failures"]),
    }
    json_path = os.path.join(out_dir, f"{label}.json")
    with open(json_path, "w") as fh:
        json.dump(bundle, fh, indent=2, sort_keys=True)
        fh.write("\n")
    csv_path = os.path.join(out_dir, f"{label}.csv")
    with open(csv_path, "w") as fh:
        fh.write("model,operator,mode,eigenvalue,coeff_max\n")
        for row in result["spectrum"]:
            fh.write(
                ",".join(
                    [
                        row["model"],
                        row["operator"],
                        f"\"{row['mode']}\"",
                        _fmt(row["eigenvalue"]),
                        _fmt(row["coeff_max"]),
                    ]
                )
                + "\n"
            )
    txt_path = os.path.join(out_dir, f"{label}.txt")
    with open(txt_path, "w") as fh:
        fh.write(f"experiment: {result['label']}\n")
        for k, v in sorted(result["residuals"].items()):
            fh.write(f"residual {k}: {_fmt(v)}\n")
        fh.write(report_render(result["reports"]))
        if result["failures"]:
            fh.write("FAILURES:\n")
            for f in sorted(result["failures"]):
                fh.write(f"  {f}\n")
        else:
            fh.write("all asserted invariants hold\n")
    return json_path, csv_path, txt_path


# ---------------------------------------------------------------------------
# presets and config


def preset_config(name):
    presets = {
        "sphere-equality": {"label": "sphere-equality", "pipeline": "sphere"},
        "torus-bounds": {
            "label": "torus-bounds",
            "pipeline": "torus",
            "model": {"kind": "circle-product", "radii": [1.0, 1.0]},
            "operators": {"truncation": 8},
            "bounds": {"kinds": ["energy-momentum"]},
            "identity": {"q_killing": [-1.0, 0.2, 1.0], "q_em": [0.3, 1.0]},
        },
        "conformal-covariance": {
            "label": "conformal-covariance",
            "pipeline": "conformal",
        },
        "aux-bundle": {
            "label": "aux-bundle",
            "pipeline": "aux",
            "model": {
                "kind": "aux-torus",
                "m": 2,
                "n": 2,
                "holonomy": [[0.5, 0.0], [0.0, 0.0]],
                "f": {"type": "cosine", "amplitude": 1.0, "axis": 0},
            },
            "operators": {"truncation": 4},
        },
        "synthetic-curvature": {
            "label": "synthetic-curvature",
            "pipeline": "synthetic",
        },
    }
    if name not in presets:
        raise ValueError(f"unknown preset {name!r}")
    return presets[name]


PIPELINES = {
    "torus": torus_experiment,
    "sphere": sphere_equality_experiment,
    "aux": aux_experiment,
    "conformal": conformal_experiment,
    "synthetic": synthetic_experiment,
}


def validate_config(cfg):
    """Structural checks on an experiment table; raises with the offending
    key path."""
    if not isinstance(cfg, dict):
        raise ValueError("experiment config must be a table")
    trunc = cfg.get("operators", {}).get("truncation", 8)
    if int(trunc) < 1:
        raise ValueError("operators.truncation must be >= 1")
    for key, val in cfg.get("tolerances", {}).items():
        if not val > 0:
            raise ValueError(f"tolerances.{key} must be positive")
    split_cfg = cfg.get("split", {})
    for key in ("parity_m", "parity_n"):
        if split_cfg.get(key, 0) not in (0, 1):
            raise ValueError(f"split.{key} must be 0 or 1")
    kinds = cfg.get("bounds", {}).get("kinds", [])
    for kind in kinds:
        if kind not in bounds_mod.BOUND_KINDS:
            raise ValueError(f"bounds.kinds: unknown kind {kind!r}")


def run(cfg, out_dir=None):
    """Execute one experiment config; returns (exit_status, result)."""
    validate_config(cfg)
    pipeline = cfg.get("pipeline")
    if pipeline is None:
        kind = cfg.get("model", {}).get("kind")
        pipeline = {
            "circle-product": "torus",
            "flat-torus": "torus",
            "sphere": "sphere",
            "aux-torus": "aux",
        }.get(kind)
    if pipeline not in PIPELINES:
        raise ValueError(f"cannot infer pipeline for config {cfg.get('label')}")
    result = PIPELINES[pipeline](cfg)
    out_dir = out_dir or cfg.get("output", {}).get("directory") or os.environ.get(
        OUT_ENV, DEFAULT_OUT
    )
    write_outputs(result, out_dir)
    return (1 if result["failures"] else 0), result


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise SystemExit(f"config parse error in {path}: {exc}")


# ---------------------------------------------------------------------------
# entry point


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="spinlab",
        description="Dirac-operator experiments on exactly solvable"
        " embedded geometries",
    )
    parser.add_argument("--out", help="output directory (or $SPINLAB_OUT)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-algebra", help="representation identity suite")
    p.add_argument("--max-dim", type=int, default=8)

    sub.add_parser("sphere-equality", help="unit-sphere equality chain")

    p = sub.add_parser("torus", help="circle-product bound pipeline")
    p.add_argument("--r1", type=float, default=1.0)
    p.add_argument("--r2", type=float, default=1.0)
    p.add_argument("-K", "--truncation", type=int, default=8)
    p.add_argument(
        "--bound",
        action="append",
        default=None,
        choices=sorted(bounds_mod.BOUND_KINDS),
    )

    sub.add_parser("conformal-covariance", help="conformal covariance suite")
    sub.add_parser("aux-bundle", help="auxiliary-bundle operator suite")
    sub.add_parser("synthetic-curvature", help="synthetic curvature suite")

    p = sub.add_parser("run", help="run experiments from a TOML config")
    p.add_argument("config")

    args = parser.parse_args(argv)
    out_dir = args.out or os.environ.get(OUT_ENV, DEFAULT_OUT)

    if args.command == "verify-algebra":
        suite = run_algebra_suite(args.max_dim)
        for row in suite["rows"]:
            print(
                f"(m={row['m']}, n={row['n']},"
                f" classes {row['class_m']}/{row['class_n']}):"
                f" max residual {_fmt(row['max_residual'])}"
            )
        if suite["failures"]:
            for f in suite["failures"]:
                print("FAIL:", f, file=sys.stderr)
            return 1
        print("algebra suite: all identities within tolerance")
        return 0

    if args.command == "sphere-equality":
        status, result = run(preset_config("sphere-equality"), out_dir)
    elif args.command == "torus":
        cfg = preset_config("torus-bounds")
        cfg["model"]["radii"] = [args.r1, args.r2]
        cfg["operators"]["truncation"] = args.truncation
        if args.bound:
            cfg["bounds"]["kinds"] = args.bound
        status, result = run(cfg, out_dir)
    elif args.command == "conformal-covariance":
        status, result = run(preset_config("conformal-covariance"), out_dir)
    elif args.command == "aux-bundle":
        status, result = run(preset_config("aux-bundle"), out_dir)
    elif args.command == "synthetic-curvature":
        status, result = run(preset_config("synthetic-curvature"), out_dir)
    elif args.command == "run":
        cfg = load_config(args.config)
        experiments = cfg.get("experiment")
        if isinstance(experiments, list):
            status = 0
            for sub_cfg in experiments:
                st, result = run(sub_cfg, out_dir)
                status = max(status, st)
                _print_summary(result)
            return status
        status, result = run(cfg, out_dir)
    else:  # pragma: no cover
        parser.error("unknown command")

    _print_summary(result)
    return status


def _print_summary(result):
    print(f"experiment: {result['label']}")
    for k, v in sorted(result["residuals"].items()):
        print(f"  residual {k}: {_fmt(v)}")
    hyp_ok = sum(1 for r in result["reports"] if r.hypothesis_ok)
    print(
        f"  bound reports: {len(result['reports'])}"
        f" ({hyp_ok} with hypothesis satisfied)"
    )
    if result["failures"]:
        for f in sorted(result["failures"]):
            print("  FAIL:", f)
    else:
        print("  all asserted invariants hold")


if __name__ == "__main__":
    sys.exit(main())
