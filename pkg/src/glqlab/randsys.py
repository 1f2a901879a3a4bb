"""Seeded generators of small GLQ instances for property checks and batch runs."""

import numpy as np

from .glq import GlqProblem
from .structure import hautus_detectable, hautus_stabilizable


def random_glq(rng, n, m, p, scale=0.7, shift=0.5, linear=True):
    """Dense random problem with ``A = scale * N(0, 1) - shift * I``.

    ``K`` is a perturbed identity, so coercivity is comfortable. With
    ``linear=False`` the linear cost terms are zero.
    """
    A = scale * rng.normal(size=(n, n)) - shift * np.eye(n)
    B = rng.normal(size=(n, m))
    C = rng.normal(size=(p, n))
    K = np.eye(m) + 0.2 * rng.normal(size=(m, m))
    z = rng.normal(size=n) if linear else np.zeros(n)
    v = rng.normal(size=m) if linear else np.zeros(m)
    return GlqProblem.create(A=A, B=B, C=C, K=K, z=z, v=v)


def random_certified(rng, n_max=4, m_max=2, p_max=2, linear=True, max_rate=None, max_tries=1000):
    """Random problem with ``n <= n_max`` passing both Hautus tests.

    Parameters
    ----------
    max_rate : float, optional
        Also require :func:`hamiltonian_radius` ``<= max_rate``, i.e. no
        optimal-trajectory time scale shorter than ``1 / max_rate``. A grid
        that must resolve the optimal control needs this.
    """
    for _ in range(max_tries):
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, m_max + 1))
        p = int(rng.integers(1, p_max + 1))
        pr = random_glq(rng, n, m, p, linear=linear)
        if max_rate is not None and hamiltonian_radius(pr) > max_rate:
            continue
        if hautus_stabilizable(pr.A, pr.B) and hautus_detectable(pr.A, pr.C):
            return pr
    raise RuntimeError("no certified system found")


def _modal_blocks(rng, n, lo, hi):
    """Real block-diagonal ``Lambda`` with eigenvalue real parts of magnitude in ``[lo, hi]``.

    Returns ``(Lambda, blocks)`` where ``blocks`` lists ``(start, size, real_part)``.
    """
    Lam = np.zeros((n, n))
    blocks = []
    i = 0
    while i < n:
        re = rng.uniform(lo, hi) * rng.choice([-1.0, 1.0])
        if i + 1 < n and rng.random() < 0.4:
            im = rng.uniform(lo, hi)
            Lam[i:i + 2, i:i + 2] = [[re, im], [-im, re]]
            blocks.append((i, 2, re))
            i += 2
        else:
            Lam[i, i] = re
            blocks.append((i, 1, re))
            i += 1
    return Lam, blocks


def _normalize_blocks(M, blocks, axis, rng):
    """Rescale each modal block of ``M`` (rows for ``axis=0``) to norm in ``[1, 2]``."""
    for start, size, _ in blocks:
        sl = (slice(start, start + size), slice(None)) if axis == 0 else (slice(None), slice(start, start + size))
        norm = np.linalg.norm(M[sl])
        if norm > 0:
            M[sl] *= rng.uniform(1.0, 2.0) / norm
    return M


def _hamiltonian(problem):
    return np.block([[problem.A, -problem.S], [-problem.Q, -problem.A.T]])


def hamiltonian_radius(problem):
    """Largest ``|mu|`` over the eigenvalues of ``[[A, -S], [-Q, -A^T]]``: the fastest optimal time scale."""
    return float(np.max(np.abs(np.linalg.eigvals(_hamiltonian(problem)))))


def hamiltonian_gap(problem):
    """Smallest ``|Re mu|`` over the eigenvalues ``mu`` of ``[[A, -S], [-Q, -A^T]]``.

    For a stabilizable and detectable system this is the decay rate of the
    infinite-horizon closed loop; it is computed from a plain eigensolve and
    does not touch the Riccati integrator.
    """
    return float(np.min(np.abs(np.linalg.eigvals(_hamiltonian(problem)).real)))


def hamiltonian_riccati(problem):
    """Stabilizing algebraic Riccati solution ``X_2 X_1^-1`` from the stable eigenvectors of the Hamiltonian.

    Returns ``None`` when the stable subspace is not a graph (``X_1``
    singular) or the spectrum touches the imaginary axis.
    """
    n = problem.n
    lam, V = np.linalg.eig(_hamiltonian(problem))
    stable = lam.real < 0
    if np.count_nonzero(stable) != n:
        return None
    X1, X2 = V[:n, stable], V[n:, stable]
    if np.linalg.cond(X1) > 1e12:
        return None
    P = np.real(np.linalg.solve(X1.T, X2.T).T)
    return 0.5 * (P + P.T)


DEFECTS = (None, "unstabilizable", "undetectable", "hidden_stable")


def random_diagonalizable(rng, n, m, p, defect=None, lo=0.5, hi=2.0, max_cond=4.0, min_gap=None, max_gain=None):
    """Diagonalizable ``A = V Lambda V^-1`` with an optional structural modification.

    Every modal block is coupled to the input and to the output with norm
    between 1 and 2, and ``cond(V) <= max_cond``. Without a modification the
    system is therefore stabilizable and detectable.

    Parameters
    ----------
    defect : {None, "unstabilizable", "undetectable", "hidden_stable"}
        ``"unstabilizable"`` zeroes the modal ``B`` rows of one unstable
        block; ``"undetectable"`` zeroes the modal ``C`` columns of one
        unstable block; ``"hidden_stable"`` zeroes the modal ``C`` columns
        of one stable block, which keeps the system detectable but gives it
        a nontrivial unobservable subspace. A block of the required sign is
        forced when none was drawn.
    min_gap : float, optional
        For detectable and stabilizable draws, resample until
        :func:`hamiltonian_gap` is at least this value. Transmission zeros
        close to the imaginary axis otherwise produce turnpikes too slow to
        resolve at moderate horizons.
    max_gain : float, optional
        Same, requiring ``|P_inf| <= max_gain`` with ``P_inf`` from
        :func:`hamiltonian_riccati`; near pole-zero cancellations give huge
        ``P_inf`` and exit layers of matching size.

    Returns
    -------
    GlqProblem
    """
    if defect not in DEFECTS:
        raise ValueError(f"unknown defect {defect!r}")
    while True:
        pr = _draw_diagonalizable(rng, n, m, p, defect, lo, hi, max_cond)
        if defect in ("unstabilizable", "undetectable"):
            return pr
        if min_gap is not None and hamiltonian_gap(pr) < min_gap:
            continue
        if max_gain is not None:
            P = hamiltonian_riccati(pr)
            if P is None or np.linalg.norm(P, 2) > max_gain:
                continue
        return pr


def _draw_diagonalizable(rng, n, m, p, defect, lo, hi, max_cond):
    Lam, blocks = _modal_blocks(rng, n, lo, hi)
    target = None
    if defect:
        want_unstable = defect != "hidden_stable"
        candidates = [blk for blk in blocks if (blk[2] > 0) == want_unstable]
        if not candidates:
            start, size, re = blocks[0]
            Lam[start:start + size, start:start + size] -= 2 * re * np.eye(size)
            blocks[0] = (start, size, -re)
            candidates = [blocks[0]]
        target = candidates[int(rng.integers(len(candidates)))]
    while True:
        V = rng.normal(size=(n, n))
        if np.linalg.cond(V) <= max_cond:
            break
    Vinv = np.linalg.inv(V)
    Bm = _normalize_blocks(rng.normal(size=(n, m)), blocks, 0, rng)
    Cm = _normalize_blocks(rng.normal(size=(p, n)), blocks, 1, rng)
    if target is not None:
        start, size, _ = target
        if defect == "unstabilizable":
            Bm[start:start + size] = 0.0
        else:
            Cm[:, start:start + size] = 0.0
    return GlqProblem.create(
        A=V @ Lam @ Vinv,
        B=V @ Bm,
        C=Cm @ Vinv,
        K=np.eye(m),
        z=rng.normal(size=n),
        v=rng.normal(size=m),
    )


def diagonalizable_suite(seed, count, n_range=(2, 4), m_max=2, p_max=2, min_gap=1.0, max_gain=20.0):
    """Seeded list of ``(problem, x0, defect)`` mixing all structural variants.

    Defect-free and ``hidden_stable`` draws are filtered with ``min_gap`` and
    ``max_gain`` (see :func:`random_diagonalizable`).
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        m = int(rng.integers(1, m_max + 1))
        p = int(rng.integers(1, p_max + 1))
        defect = DEFECTS[int(rng.choice(4, p=[0.4, 0.2, 0.2, 0.2]))]
        pr = random_diagonalizable(rng, n, m, p, defect, min_gap=min_gap, max_gain=max_gain)
        out.append((pr, rng.normal(size=n), defect))
    return out


def scalar_demo():
    """``A = -1``, ``B = C = K = 1``, ``z = 1``, ``v = 0``; steady triple ``(-1/2, -1/2, -1/2)``."""
    one = np.ones((1, 1))
    return GlqProblem.create(A=-one, B=one, C=one, K=one, z=np.ones(1), v=np.zeros(1))


def tanh_problem():
    """``A = 0``, ``B = C = K = 1``; the Riccati flow is ``tanh(t)``."""
    one = np.ones((1, 1))
    return GlqProblem.create(A=0 * one, B=one, C=one, K=one)
