"""Independent checks of a simultaneous Schur decomposition.

Nothing here calls the factorization kernels: the checks use matrix
products, norms and, for spectra, the block-cyclic pencil oracle.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field as dc_field

import numpy as np
import scipy.linalg

from .errors import ContractError
from .linalg.oracles import cyclic_embedding_oracle, spectral_distance
from .quiver import Kind, Quiver, Representation, classify, find_cycle
from .shapes import ShapeClass


@dataclass
class Tolerances:
    """Pass thresholds.

    ``reconstruction`` and ``zero`` are relative to ``max(1, ||A_i||_F)``;
    ``orthogonality`` is multiplied by the factor's size.
    """

    reconstruction: float = 1e-10
    orthogonality: float = 1e-12
    zero: float = 1e-10
    spectrum: float = 1e-6
    condition: float = 1e8


@dataclass
class ShapeVerdict:
    """Outcome of :func:`check_shape`; ``violations`` use 1-based ``(row, col)``."""

    ok: bool
    declared: str
    violations: list[tuple[int, int]] = dc_field(default_factory=list)
    reason: str = ""


@dataclass
class SpectrumCheck:
    """``status`` is ``pass``, ``fail``, ``advisory`` or ``not_applicable``."""

    component: int
    status: str
    distance: float | None = None
    condition: float | None = None
    reason: str = ""


@dataclass
class VerificationReport:
    orthogonality: dict[int, float]
    reconstruction: dict[int, float]
    scales: dict[int, float]
    shapes: dict[int, ShapeVerdict]
    spectrum: list[SpectrumCheck]
    tolerances: Tolerances
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failures": list(self.failures),
            "orthogonality": {str(k): v for k, v in self.orthogonality.items()},
            "reconstruction": {str(k): v for k, v in self.reconstruction.items()},
            "shapes": {str(k): asdict(v) for k, v in self.shapes.items()},
            "spectrum": [asdict(s) for s in self.spectrum],
            "tolerances": asdict(self.tolerances),
        }


def check_orthogonality(q) -> float:
    """Frobenius norm of ``Q^H Q - I``."""
    q = np.asarray(q)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ContractError(f"orthogonality check needs a square matrix, got shape {q.shape}")
    return float(np.linalg.norm(q.conj().T @ q - np.eye(q.shape[0])))


def check_reconstruction(decomp, quiver: Quiver, rep: Representation) -> dict[int, float]:
    """``||Q_dst^H A Q_src - T||_F`` for every edge."""
    out = {}
    for e in quiver.edges:
        try:
            qs, qd, t = decomp.Q[e.src], decomp.Q[e.dst], decomp.T[e.id]
        except KeyError as exc:
            raise ContractError(f"decomposition lacks a factor for edge {e.id}: missing {exc}") from None
        a = rep[e.id]
        if t.shape != a.shape or qs.shape[0] != a.shape[1] or qd.shape[0] != a.shape[0]:
            raise ContractError(f"edge {e.id}: factor shapes do not fit the matrix")
        out[e.id] = float(np.linalg.norm(qd.conj().T @ a @ qs - t))
    return out


def _discriminant(b) -> float:
    (a, c), (d, e) = np.real(b)
    return float((a - e) ** 2 + 4.0 * c * d)


def check_shape(t, declared: ShapeClass | str, tol: float = 0.0, block=None) -> ShapeVerdict:
    """Does ``t`` have the zero pattern of ``declared``?

    Entries with magnitude ``<= tol`` count as zero.  For quasi shapes the
    nonzero subdiagonal entries must be isolated, and each resulting 2x2
    diagonal block must have a negative discriminant.  ``block(start)``, when
    given, returns the 2x2 matrix whose discriminant is tested (for a cycle,
    the product of the diagonal blocks of all its edges); by default it is
    the block of ``t`` itself.
    """
    if isinstance(declared, str):
        declared = ShapeClass.parse(declared)
    t = np.asarray(t)
    rows, cols = t.shape
    name = str(declared)
    if not declared.admits(rows, cols):
        return ShapeVerdict(False, name, [], f"{name} does not fit a {rows}x{cols} matrix")
    mask = declared.zero_mask(rows, cols) & (np.abs(t) > tol)
    bad = [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(mask))]
    if bad:
        return ShapeVerdict(False, name, bad, f"nonzero entry at {bad[0]}")
    if declared.quasi:
        sub = [(i, j) for i, j in declared.subdiagonal(rows, cols) if abs(t[i, j]) > tol]
        for (i0, j0), (i1, j1) in zip(sub, sub[1:]):
            if j1 == j0 + 1:
                return ShapeVerdict(False, name, [(i1 + 1, j1 + 1)], "adjacent 2x2 blocks overlap")
        if np.isrealobj(t):
            for i, j in sub:
                b = block(j) if block is not None else t[i - 1:i + 1, j:j + 2]
                if _discriminant(b) >= 0:
                    return ShapeVerdict(False, name, [(i + 1, j + 1)], "2x2 block has real eigenvalues")
        elif sub:
            return ShapeVerdict(False, name, [(i + 1, j + 1) for i, j in sub], "2x2 blocks in a complex matrix")
    return ShapeVerdict(True, name)


def _adjugate(b):
    if b.shape == (1, 1):
        return np.ones_like(b)
    return np.array([[b[1, 1], -b[0, 1]], [-b[1, 0], b[0, 0]]])


def _block_product(ts, signs, start, size):
    """Diagonal-block product of a cycle, inverses replaced by adjugates."""
    sl = slice(start, start + size)
    acc = np.eye(size, dtype=np.result_type(*ts))
    for t, s in zip(ts, signs):
        b = t[sl, sl]
        acc = (b if s == 1 else _adjugate(b)) @ acc
    return acc


def _t_spectrum(ts, signs, tol):
    """Eigenvalues of the signed product read off the diagonal blocks."""
    n = ts[0].shape[0]
    split = [all(abs(t[j + 1, j]) <= tol for t in ts) for j in range(n - 1)]
    out, j = [], 0
    while j < n:
        size = 1 if j == n - 1 or split[j] else 2
        sl = slice(j, j + size)
        num = _block_product(ts, signs, j, size)
        den = 1.0
        for t, s in zip(ts, signs):
            if s == -1:
                den *= np.linalg.det(t[sl, sl])
        mus = [num[0, 0]] if size == 1 else np.linalg.eigvals(num)
        for mu in mus:
            out.append(mu / den if den != 0 else complex(np.inf))
        j += size
    return np.array(out, dtype=complex)


def _signed_product(mats, signs):
    p = np.eye(mats[0].shape[0], dtype=np.result_type(*mats))
    for a, s in zip(mats, signs):
        p = a @ p if s == 1 else np.linalg.solve(a, p)
    return p


def _eig_condition(p) -> float:
    """Largest relative eigenvalue condition number of ``p``."""
    w, vl, vr = scipy.linalg.eig(p, left=True, right=True)
    norm = np.linalg.norm(p, 2)
    worst = 0.0
    for k in range(len(w)):
        y, x = vl[:, k], vr[:, k]
        s = abs(np.vdot(y, x)) / (np.linalg.norm(y) * np.linalg.norm(x))
        kappa = np.inf if s == 0 else 1.0 / s
        rel = kappa * norm / max(abs(w[k]), np.finfo(float).tiny)
        worst = max(worst, rel)
    return float(worst)


def check_spectrum(decomp, quiver: Quiver, rep: Representation, component_index: int,
                   tol: Tolerances | None = None) -> SpectrumCheck:
    """Compare the T-cycle spectrum with the oracle on the A-cycle."""
    tol = tol or Tolerances()
    comp = classify(quiver).components[component_index]
    if comp.kind is not Kind.PSEUDOTREE:
        return SpectrumCheck(component_index, "not_applicable", reason="component has no cycle")
    cyc = find_cycle(quiver, comp)
    if len({quiver.dim(v) for v in cyc.vertices}) > 1:
        return SpectrumCheck(component_index, "not_applicable", reason="rectangular cycle")
    mats = [rep[e] for e in cyc.edges]
    for a, s in zip(mats, cyc.signs):
        if s == -1:
            sv = np.linalg.svd(a, compute_uv=False)
            if sv[-1] <= 1e3 * np.finfo(float).eps * max(sv[0], np.finfo(float).tiny):
                return SpectrumCheck(component_index, "not_applicable",
                                     reason="singular matrix on a reversed cycle edge")
    ts = [decomp.T[e] for e in cyc.edges]
    scale = max(max(1.0, float(np.linalg.norm(a))) for a in mats)
    ours = _t_spectrum(ts, cyc.signs, tol.zero * scale)
    ref = cyclic_embedding_oracle(mats, cyc.signs)
    dist = spectral_distance(ours, ref)
    cond = _eig_condition(_signed_product(mats, cyc.signs))
    if dist <= tol.spectrum:
        status = "pass"
    elif cond > tol.condition:
        status = "advisory"
    else:
        status = "fail"
    return SpectrumCheck(component_index, status, dist, cond)


def verify_all(decomp, quiver: Quiver, rep: Representation, tol: Tolerances | None = None,
               spectrum: bool = True) -> VerificationReport:
    """Run every check and collect the failures."""
    tol = tol or Tolerances()
    failures = []
    orth = {}
    for v in quiver.vertices:
        q = decomp.Q.get(v.id)
        if q is None or q.shape != (v.dim, v.dim):
            failures.append(f"vertex {v.id}: missing or mis-sized factor")
            continue
        orth[v.id] = check_orthogonality(q)
        if orth[v.id] > tol.orthogonality * v.dim:
            failures.append(f"vertex {v.id}: orthogonality defect {orth[v.id]:.3e}")
    if failures:
        return VerificationReport(orth, {}, {}, {}, [], tol, failures)
    recon = check_reconstruction(decomp, quiver, rep)
    scales = {e.id: max(1.0, float(np.linalg.norm(rep[e.id]))) for e in quiver.edges}
    for eid, r in recon.items():
        if r > tol.reconstruction * scales[eid]:
            failures.append(f"edge {eid}: reconstruction residual {r:.3e}")

    report = classify(quiver)
    cycles = {}
    for ci, comp in enumerate(report.components):
        if comp.kind is Kind.PSEUDOTREE:
            cyc = find_cycle(quiver, comp)
            for e in cyc.edges:
                cycles[e] = cyc
        quasi = [e for e in comp.edges if decomp.shapes[e].quasi]
        if len(quasi) > 1:
            failures.append(f"component {ci}: {len(quasi)} edges carry 2x2 blocks")
        if quasi and (decomp.field == "complex" or comp.kind is not Kind.PSEUDOTREE):
            failures.append(f"component {ci}: 2x2 blocks not allowed here")

    shapes = {}
    for e in quiver.edges:
        declared = decomp.shapes[e.id]
        t = decomp.T[e.id]
        block = None
        if declared.quasi and e.id in cycles:
            cyc = cycles[e.id]
            ts = [decomp.T[x] for x in cyc.edges]
            block = (lambda j, ts=ts, s=cyc.signs: _block_product(ts, s, j, 2))
        shapes[e.id] = check_shape(t, declared, tol.zero * scales[e.id], block)
        if not shapes[e.id].ok:
            failures.append(f"edge {e.id}: shape {declared} violated ({shapes[e.id].reason})")

    spectra = []
    if spectrum:
        for ci, comp in enumerate(report.components):
            if comp.kind is not Kind.PSEUDOTREE:
                continue
            chk = check_spectrum(decomp, quiver, rep, ci, tol)
            spectra.append(chk)
            if chk.status == "fail":
                failures.append(f"component {ci}: spectrum mismatch {chk.distance:.3e}")
    return VerificationReport(orth, recon, scales, shapes, spectra, tol, failures)
