#!/usr/bin/env python3
"""Generate STO-6G FCIDUMP and dipole-matrix files for homonuclear diatomics.

This is an external data-generation tool: the C++ library deliberately ingests
integrals from files and never computes them. The script builds Cartesian
Gaussian integrals (McMurchie-Davidson scheme), runs a closed-shell RHF, and
dumps MO-basis integrals plus MO position matrix elements.

Usage:
  python3 gen_sto6g_fcidump.py C2 1.242 out/c2
  python3 gen_sto6g_fcidump.py N2 1.098 out/n2

Produces <prefix>.fcidump and <prefix>.dipoles.
"""
import sys
import numpy as np
from scipy.special import hyp1f1

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903
HARTREE_TO_EV = 27.211386245988

# STO-6G expansions of zeta=1 Slater orbitals, re-derived by least-squares
# (max-overlap) fitting; the 2s/2p shell shares exponents with the 2p error
# weighted by its threefold degeneracy. Reproduces the standard tabulation.
STO6G_1S_EXP = [23.103031568, 4.2359155348, 1.1850565183, 0.40709889654,
                0.15808841611, 0.065109539596]
STO6G_1S_COEF = [0.0091635967285, 0.049361492555, 0.16853830158, 0.37056279970,
                 0.41649152980, 0.13033408410]
STO6G_SP_EXP = [8.8228723464, 1.8754696131, 0.60900002915, 0.24069474058,
                0.106142884, 0.049036132836]
STO6G_2S_COEF = [-0.01535340401, -0.047871625428, -0.028988279609, 0.25237923129,
                 0.58595407302, 0.24603857613]
STO6G_2P_COEF = [0.0046628660148, 0.041447600727, 0.17756355633, 0.4124276499,
                 0.4204322093, 0.10434421254]

# standard molecular Slater scale factors (zeta_1s, zeta_2sp)
SCALE = {"C": (5.67, 1.72), "N": (6.67, 1.95)}
CHARGE = {"C": 6, "N": 7}
NOCC = {"C2": 6, "N2": 7}


class Primitive:
    __slots__ = ("alpha", "coef", "center", "lmn")

    def __init__(self, alpha, coef, center, lmn):
        self.alpha = alpha
        self.coef = coef
        self.center = np.asarray(center, dtype=float)
        self.lmn = lmn


def gaussian_norm(alpha, lmn):
    l, m, n = lmn
    from math import factorial
    def df(k):  # (2k-1)!!
        r = 1
        for i in range(3, 2 * k, 2):
            r *= i
        return r
    pre = (2.0 * alpha / np.pi) ** 0.75
    num = (4.0 * alpha) ** ((l + m + n) / 2.0)
    den = np.sqrt(df(l) * df(m) * df(n))
    return pre * num / den


def build_basis(symbols, centers):
    """Contracted AO list: per atom 1s, 2s, 2px, 2py, 2pz."""
    aos = []
    for sym, ctr in zip(symbols, centers):
        z1, z2 = SCALE[sym]
        shells = [
            ([a * z1 * z1 for a in STO6G_1S_EXP], STO6G_1S_COEF, (0, 0, 0)),
            ([a * z2 * z2 for a in STO6G_SP_EXP], STO6G_2S_COEF, (0, 0, 0)),
            ([a * z2 * z2 for a in STO6G_SP_EXP], STO6G_2P_COEF, (1, 0, 0)),
            ([a * z2 * z2 for a in STO6G_SP_EXP], STO6G_2P_COEF, (0, 1, 0)),
            ([a * z2 * z2 for a in STO6G_SP_EXP], STO6G_2P_COEF, (0, 0, 1)),
        ]
        for exps, coefs, lmn in shells:
            prims = [Primitive(a, c * gaussian_norm(a, lmn), ctr, lmn)
                     for a, c in zip(exps, coefs)]
            aos.append(prims)
    # renormalize each contracted AO exactly
    for prims in aos:
        s = 0.0
        for pa in prims:
            for pb in prims:
                s += pa.coef * pb.coef * overlap_prim(pa, pb)
        for pa in prims:
            pa.coef /= np.sqrt(s)
    return aos


def hermite_E(i, j, t, Qx, a, b):
    """Hermite expansion coefficient E_t^{ij} (1D), recursive."""
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return np.exp(-mu * Qx * Qx)
    if j == 0:
        return (hermite_E(i - 1, j, t - 1, Qx, a, b) / (2 * p)
                - (mu * Qx / a) * hermite_E(i - 1, j, t, Qx, a, b)
                + (t + 1) * hermite_E(i - 1, j, t + 1, Qx, a, b))
    return (hermite_E(i, j - 1, t - 1, Qx, a, b) / (2 * p)
            + (mu * Qx / b) * hermite_E(i, j - 1, t, Qx, a, b)
            + (t + 1) * hermite_E(i, j - 1, t + 1, Qx, a, b))


def overlap_prim(pa, pb):
    a, b = pa.alpha, pb.alpha
    p = a + b
    s = (np.pi / p) ** 1.5
    for d in range(3):
        s *= hermite_E(pa.lmn[d], pb.lmn[d], 0, pa.center[d] - pb.center[d], a, b)
    return s


def kinetic_prim(pa, pb):
    a, b = pa.alpha, pb.alpha
    l2, m2, n2 = pb.lmn

    def s_shift(d, shift):
        lmn = list(pb.lmn)
        lmn[d] += shift
        if lmn[d] < 0:
            return 0.0
        q = Primitive(b, 1.0, pb.center, tuple(lmn))
        return overlap_prim(pa, q)

    t = 0.0
    for d, j in enumerate(pb.lmn):
        term = b * (2 * j + 1) * s_shift(d, 0) \
            - 2.0 * b * b * s_shift(d, 2) \
            - 0.5 * j * (j - 1) * s_shift(d, -2)
        t += term
    return t


def boys(n, T):
    return hyp1f1(n + 0.5, n + 1.5, -T) / (2.0 * n + 1.0)


def hermite_R(t, u, v, n, p, PC, R2):
    """Auxiliary Hermite Coulomb integral R^n_{tuv}."""
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * R2)
    if t > 0:
        return (t - 1) * hermite_R(t - 2, u, v, n + 1, p, PC, R2) \
            + PC[0] * hermite_R(t - 1, u, v, n + 1, p, PC, R2)
    if u > 0:
        return (u - 1) * hermite_R(t, u - 2, v, n + 1, p, PC, R2) \
            + PC[1] * hermite_R(t, u - 1, v, n + 1, p, PC, R2)
    return (v - 1) * hermite_R(t, u, v - 2, n + 1, p, PC, R2) \
        + PC[2] * hermite_R(t, u, v - 1, n + 1, p, PC, R2)


def nuclear_prim(pa, pb, charges, centers):
    a, b = pa.alpha, pb.alpha
    p = a + b
    P = (a * pa.center + b * pb.center) / p
    E = [[hermite_E(pa.lmn[d], pb.lmn[d], t, pa.center[d] - pb.center[d], a, b)
          for t in range(pa.lmn[d] + pb.lmn[d] + 1)] for d in range(3)]
    val = 0.0
    for Z, C in zip(charges, centers):
        PC = P - C
        R2 = float(PC @ PC)
        acc = 0.0
        for t in range(len(E[0])):
            for u in range(len(E[1])):
                for v in range(len(E[2])):
                    acc += E[0][t] * E[1][u] * E[2][v] * hermite_R(t, u, v, 0, p, PC, R2)
        val += -Z * acc
    return val * 2.0 * np.pi / p


def dipole_prim(pa, pb, origin):
    """<a| r_d - origin_d |b> for d = x,y,z."""
    a, b = pa.alpha, pb.alpha
    p = a + b
    P = (a * pa.center + b * pb.center) / p
    out = np.zeros(3)
    for d in range(3):
        s = 1.0
        for e in range(3):
            Q = pa.center[e] - pb.center[e]
            if e == d:
                E1 = hermite_E(pa.lmn[e], pb.lmn[e], 1, Q, a, b)
                E0 = hermite_E(pa.lmn[e], pb.lmn[e], 0, Q, a, b)
                s *= E1 + (P[e] - origin[e]) * E0
            else:
                s *= hermite_E(pa.lmn[e], pb.lmn[e], 0, Q, a, b)
        out[d] = s * (np.pi / p) ** 1.5
    return out


def eri_prim(pa, pb, pc, pd):
    a, b, c, d = pa.alpha, pb.alpha, pc.alpha, pd.alpha
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = (a * pa.center + b * pb.center) / p
    Q = (c * pc.center + d * pd.center) / q
    PQ = P - Q
    R2 = float(PQ @ PQ)
    E1 = [[hermite_E(pa.lmn[e], pb.lmn[e], t, pa.center[e] - pb.center[e], a, b)
           for t in range(pa.lmn[e] + pb.lmn[e] + 1)] for e in range(3)]
    E2 = [[hermite_E(pc.lmn[e], pd.lmn[e], t, pc.center[e] - pd.center[e], c, d)
           for t in range(pc.lmn[e] + pd.lmn[e] + 1)] for e in range(3)]
    val = 0.0
    for t in range(len(E1[0])):
        for u in range(len(E1[1])):
            for v in range(len(E1[2])):
                c1 = E1[0][t] * E1[1][u] * E1[2][v]
                if c1 == 0.0:
                    continue
                for tt in range(len(E2[0])):
                    for uu in range(len(E2[1])):
                        for vv in range(len(E2[2])):
                            c2 = E2[0][tt] * E2[1][uu] * E2[2][vv]
                            if c2 == 0.0:
                                continue
                            sgn = (-1.0) ** (tt + uu + vv)
                            val += c1 * c2 * sgn * hermite_R(
                                t + tt, u + uu, v + vv, 0, alpha, PQ, R2)
    return val * 2.0 * np.pi ** 2.5 / (p * q * np.sqrt(p + q))


def contracted(func, *aolists):
    import itertools
    tot = 0.0
    for prims in itertools.product(*aolists):
        coefprod = np.prod([pr.coef for pr in prims])
        tot += coefprod * func(*prims)
    return tot


def build_integrals(aos, charges, centers, origin):
    n = len(aos)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    D = np.zeros((3, n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = contracted(overlap_prim, aos[i], aos[j])
            T[i, j] = T[j, i] = contracted(kinetic_prim, aos[i], aos[j])
            V[i, j] = V[j, i] = contracted(
                lambda x, y: nuclear_prim(x, y, charges, centers), aos[i], aos[j])
            dd = np.zeros(3)
            import itertools
            for pa, pb in itertools.product(aos[i], aos[j]):
                dd += pa.coef * pb.coef * dipole_prim(pa, pb, origin)
            D[:, i, j] = D[:, j, i] = dd
    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(i + 1):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if kl > ij:
                        continue
                    v = contracted(eri_prim, aos[i], aos[j], aos[k], aos[l])
                    for (p, q, r, s) in {(i, j, k, l), (j, i, k, l), (i, j, l, k),
                                         (j, i, l, k), (k, l, i, j), (l, k, i, j),
                                         (k, l, j, i), (l, k, j, i)}:
                        eri[p, q, r, s] = v
    return S, T, V, D, eri


def scf(S, h, eri, nocc, e_nuc, C0=None, occ_sel=None, max_iter=300, tol=1e-12):
    """Closed-shell SCF with DIIS.

    occ_sel: indices (into C0's columns) of the target occupied set; when given,
    occupation follows maximum overlap with the previous occupied span (MOM)
    instead of aufbau, so a chosen configuration can be converged even when it
    is not the aufbau one.
    """
    n = S.shape[0]
    w, U = np.linalg.eigh(S)
    X = U @ np.diag(w ** -0.5) @ U.T

    def fock(Dm):
        J = np.einsum("pqrs,rs->pq", eri, Dm)
        K = np.einsum("prqs,rs->pq", eri, Dm)
        return h + J - 0.5 * K

    if C0 is None:
        Fo = X.T @ h @ X
        _, Co = np.linalg.eigh(Fo)
        C0 = X @ Co
    Cocc = C0[:, occ_sel if occ_sel is not None else range(nocc)]
    Dm = 2.0 * Cocc @ Cocc.T
    F = fock(Dm)
    diis_F, diis_e = [], []
    E_old = 0.0
    for it in range(max_iter):
        Fo = X.T @ F @ X
        eps, Co = np.linalg.eigh(Fo)
        C = X @ Co
        if occ_sel is not None:
            proj = np.abs(Cocc.T @ S @ C).sum(axis=0)
            occ = np.sort(np.argsort(-proj)[:nocc])
        else:
            occ = np.arange(nocc)
        Cocc = C[:, occ]
        Dm = 2.0 * Cocc @ Cocc.T
        F = fock(Dm)
        E = 0.5 * np.sum(Dm * (h + F)) + e_nuc
        err = F @ Dm @ S - S @ Dm @ F
        diis_F.append(F.copy())
        diis_e.append(err.copy())
        if len(diis_F) > 8:
            diis_F.pop(0)
            diis_e.pop(0)
        if len(diis_F) > 1:
            m = len(diis_F)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = np.sum(diis_e[i] * diis_e[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                c = np.linalg.solve(B, rhs)[:m]
                F = sum(ci * Fi for ci, Fi in zip(c, diis_F))
            except np.linalg.LinAlgError:
                pass
        if abs(E - E_old) < tol and np.max(np.abs(err)) < 1e-9:
            # final diagonalization so returned C are canonical MOs of the
            # converged Fock matrix, reordered occupied-first
            Fo = X.T @ fock(Dm) @ X
            eps, Co = np.linalg.eigh(Fo)
            C = X @ Co
            if occ_sel is not None:
                proj = np.abs(Cocc.T @ S @ C).sum(axis=0)
                occ = np.sort(np.argsort(-proj)[:nocc])
                virt = [i for i in range(n) if i not in occ]
                order = list(occ) + virt
                C = C[:, order]
                eps = eps[order]
            return E, C, eps
        E_old = E
    raise RuntimeError("SCF did not converge: last E = %.10f" % E)


def rhf(S, h, eri, nocc, e_nuc):
    """Global RHF minimum search: aufbau first, then a scan over occupation
    patterns converged with MOM; returns the lowest converged solution."""
    import itertools
    n = S.shape[0]
    best = None
    try:
        best = scf(S, h, eri, nocc, e_nuc)
    except RuntimeError:
        pass
    E0, C0, _ = best if best is not None else scf(S, h, eri, nocc, e_nuc, max_iter=1000)
    for occ in itertools.combinations(range(n), nocc):
        try:
            sol = scf(S, h, eri, nocc, e_nuc, C0=C0, occ_sel=list(occ))
        except RuntimeError:
            continue
        if best is None or sol[0] < best[0] - 1e-10:
            best = sol
    return best


def write_fcidump(path, h_mo, eri_mo, e_core, nelec, thresh=1e-12):
    n = h_mo.shape[0]
    with open(path, "w") as f:
        f.write("&FCI NORB=%d,NELEC=%d,MS2=0,\n" % (n, nelec))
        f.write(" ORBSYM=" + "1," * n + "\n")
        f.write(" ISYM=1,\n")
        f.write("&END\n")
        for i in range(n):
            for j in range(i + 1):
                for k in range(i + 1):
                    lmax = j if k == i else k
                    for l in range(lmax + 1):
                        v = eri_mo[i, j, k, l]
                        if abs(v) > thresh:
                            f.write("%23.16E %3d %3d %3d %3d\n" % (v, i + 1, j + 1, k + 1, l + 1))
        for i in range(n):
            for j in range(i + 1):
                v = h_mo[i, j]
                if abs(v) > thresh:
                    f.write("%23.16E %3d %3d %3d %3d\n" % (v, i + 1, j + 1, 0, 0))
        f.write("%23.16E %3d %3d %3d %3d\n" % (e_core, 0, 0, 0, 0))


def write_dipoles(path, D_mo, thresh=1e-12):
    n = D_mo.shape[1]
    with open(path, "w") as f:
        f.write("# MO position matrix elements <p| r_j |q> (Bohr), 1-based indices\n")
        for lab, d in zip("xyz", D_mo):
            for p in range(n):
                for q in range(p + 1):
                    if abs(d[p, q]) > thresh:
                        f.write("%s %d %d %.16e\n" % (lab, p + 1, q + 1, d[p, q]))


def main():
    mol = sys.argv[1]
    bond_angstrom = float(sys.argv[2])
    prefix = sys.argv[3]
    sym = mol[0].upper() + mol[1:-1].lower() if mol[1].isalpha() else mol[0]
    sym = {"C2": "C", "N2": "N"}[mol]
    Rb = bond_angstrom * ANGSTROM_TO_BOHR
    centers = [np.array([0.0, 0.0, -Rb / 2]), np.array([0.0, 0.0, Rb / 2])]
    charges = [CHARGE[sym], CHARGE[sym]]
    origin = np.zeros(3)
    nocc = NOCC[mol]
    nelec = 2 * nocc

    aos = build_basis([sym, sym], centers)
    print("AOs:", len(aos))
    S, T, V, D, eri = build_integrals(aos, charges, centers, origin)
    h = T + V
    e_nuc = charges[0] * charges[1] / Rb
    E, C, eps = rhf(S, h, eri, nocc, e_nuc)
    print("%s  R = %.4f A   E_RHF = %.8f Ha = %.4f eV" %
          (mol, bond_angstrom, E, E * HARTREE_TO_EV))

    h_mo = C.T @ h @ C
    eri_mo = np.einsum("pi,qj,pqrs,rk,sl->ijkl", C, C, eri, C, C, optimize=True)
    D_mo = np.einsum("pi,dpq,qj->dij", C, D, C, optimize=True)
    write_fcidump(prefix + ".fcidump", h_mo, eri_mo, e_nuc, nelec)
    write_dipoles(prefix + ".dipoles", D_mo)
    print("wrote %s.fcidump and %s.dipoles" % (prefix, prefix))


if __name__ == "__main__":
    main()
