#!/usr/bin/env python3
"""Regenerate the chemistry fixtures under crates/core/tests/fixtures.

Requires pyscf (tested with 2.14.0). Output is deterministic up to the
SCF/CCSD convergence thresholds set below.
"""

import hashlib
import json
import pathlib
import sys

import numpy as np
from pyscf import ao2mo, cc, gto, scf

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures"


def ften(arr, convention):
    arr = np.asarray(arr, dtype=complex)
    flat = arr.reshape(-1)
    data = np.empty(2 * flat.size)
    data[0::2] = flat.real
    data[1::2] = flat.imag
    return {
        "version": 1,
        "order": arr.ndim,
        "dims": list(arr.shape),
        "layout": "row-major",
        "convention": convention,
        "dtype": "complex128",
        "data": [float(x) for x in data],
    }


def write(name, doc):
    path = OUT / name
    text = json.dumps(doc, separators=(",", ":"))
    path.write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def amplitude_fixture(tag, atom, basis):
    mol = gto.M(atom=atom, basis=basis, unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    mycc = cc.RCCSD(mf)
    mycc.conv_tol = 1e-10
    mycc.conv_tol_normt = 1e-8
    mycc.kernel()
    t2 = mycc.t2
    nocc, nvir = t2.shape[0], t2.shape[2]
    m = nocc + nvir
    n = 2 * m

    eri = ao2mo.restore(1, ao2mo.full(mol, mf.mo_coeff), m)
    ovov = eri[:nocc, nocc:, :nocc, nocc:]
    e_ab = float(np.einsum("ijab,iajb->", t2, ovov))

    # alpha-beta generator T - T^dagger in charge-charge form,
    # spin orbital 2p + s with alpha = 0, pair-symmetric halves
    x = np.zeros((n, n, n, n))
    for i in range(nocc):
        for j in range(nocc):
            for a in range(nvir):
                for b in range(nvir):
                    t = t2[i, j, a, b] / 2.0
                    A, I = 2 * (nocc + a), 2 * i
                    B, J = 2 * (nocc + b) + 1, 2 * j + 1
                    x[A, I, B, J] += t
                    x[B, J, A, I] += t
                    x[I, A, J, B] -= t
                    x[J, B, I, A] -= t

    # <IJ||AB> on the occupied-occupied / virtual-virtual block only
    v = np.zeros((n, n, n, n))
    occ = [p for p in range(n) if p // 2 < nocc]
    vir = [p for p in range(n) if p // 2 >= nocc]

    def phys(p, q, r, s):
        if p % 2 != r % 2 or q % 2 != s % 2:
            return 0.0
        return eri[p // 2, r // 2, q // 2, s // 2]

    for I in occ:
        for J in occ:
            for A in vir:
                for B in vir:
                    v[I, J, A, B] = phys(I, J, A, B) - phys(I, J, B, A)

    sums = {
        f"{tag}_t2ab.json": write(f"{tag}_t2ab.json", ften(x, "charge-charge")),
        f"{tag}_v.json": write(f"{tag}_v.json", ften(v, "pqrs-ladder")),
    }
    meta = {
        "basis": basis,
        "atom": atom,
        "spin_orbitals": n,
        "occupied_spatial": nocc,
        "e_hf": float(mf.e_tot),
        "e_ccsd_corr": float(mycc.e_corr),
        "e_doubles_ab": e_ab,
        "sha256": sums,
    }
    (OUT / f"{tag}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(tag, n, e_ab, file=sys.stderr)


def open_shell_fixture(tag, atom, basis, spin):
    """alpha-beta amplitudes of UCCSD on a UHF reference."""
    mol = gto.M(atom=atom, basis=basis, unit="Angstrom", spin=spin, verbose=0)
    mf = scf.UHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    # follow internal instabilities until the solution is a minimum
    for _ in range(10):
        mo, _, stable, _ = mf.stability(return_status=True)
        if stable:
            break
        dm = mf.make_rdm1(mo, mf.mo_occ)
        mf.kernel(dm)
    else:
        raise RuntimeError(f"{tag}: UHF did not reach a stable solution")
    mycc = cc.UCCSD(mf)
    mycc.conv_tol = 1e-10
    mycc.conv_tol_normt = 1e-8
    mycc.kernel()
    t2ab = mycc.t2[1]
    nocca, noccb, nvira, nvirb = t2ab.shape
    m = nocca + nvira
    n = 2 * m
    nocc = (nocca, noccb)
    ca, cb = mf.mo_coeff

    def block(c1, c2):
        return ao2mo.general(mol, (c1, c1, c2, c2), compact=False).reshape(m, m, m, m)

    eri = {(0, 0): block(ca, ca), (0, 1): block(ca, cb), (1, 1): block(cb, cb)}
    eri[(1, 0)] = eri[(0, 1)].transpose(2, 3, 0, 1)
    e_ab = float(np.einsum("ijab,iajb->", t2ab, eri[(0, 1)][:nocca, nocca:, :noccb, noccb:]))

    x = np.zeros((n, n, n, n))
    for i in range(nocca):
        for j in range(noccb):
            for a in range(nvira):
                for b in range(nvirb):
                    t = t2ab[i, j, a, b] / 2.0
                    A, I = 2 * (nocca + a), 2 * i
                    B, J = 2 * (noccb + b) + 1, 2 * j + 1
                    x[A, I, B, J] += t
                    x[B, J, A, I] += t
                    x[I, A, J, B] -= t
                    x[J, B, I, A] -= t

    def phys(p, q, r, s):
        if p % 2 != r % 2 or q % 2 != s % 2:
            return 0.0
        return eri[(p % 2, q % 2)][p // 2, r // 2, q // 2, s // 2]

    v = np.zeros((n, n, n, n))
    occ = [p for p in range(n) if p // 2 < nocc[p % 2]]
    vir = [p for p in range(n) if p // 2 >= nocc[p % 2]]
    for I in occ:
        for J in occ:
            for A in vir:
                for B in vir:
                    v[I, J, A, B] = phys(I, J, A, B) - phys(I, J, B, A)

    sums = {
        f"{tag}_t2ab.json": write(f"{tag}_t2ab.json", ften(x, "charge-charge")),
        f"{tag}_v.json": write(f"{tag}_v.json", ften(v, "pqrs-ladder")),
    }
    meta = {
        "basis": basis,
        "atom": atom,
        "spin": spin,
        "spin_orbitals": n,
        "occupied_spatial": list(nocc),
        "e_hf": float(mf.e_tot),
        "e_ccsd_corr": float(mycc.e_corr),
        "e_doubles_ab": e_ab,
        "sha256": sums,
    }
    (OUT / f"{tag}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(tag, n, e_ab, file=sys.stderr)


NAPHTHALENE = """
C   0.000000   0.709500  0.0
C   0.000000  -0.709500  0.0
C   1.232700   1.402900  0.0
C  -1.232700   1.402900  0.0
C   1.232700  -1.402900  0.0
C  -1.232700  -1.402900  0.0
C   2.433200   0.702800  0.0
C  -2.433200   0.702800  0.0
C   2.433200  -0.702800  0.0
C  -2.433200  -0.702800  0.0
H   1.231500   2.490300  0.0
H  -1.231500   2.490300  0.0
H   1.231500  -2.490300  0.0
H  -1.231500  -2.490300  0.0
H   3.378500   1.242000  0.0
H  -3.378500   1.242000  0.0
H   3.378500  -1.242000  0.0
H  -3.378500  -1.242000  0.0
"""


def pi_fixture():
    mol = gto.M(atom=NAPHTHALENE, basis="cc-pvdz", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-11
    mf.kernel()
    c = mf.mo_coeff
    nocc = mol.nelectron // 2
    # pi orbitals are odd under z -> -z: all weight on AOs with odd z power
    labels = mol.ao_labels(fmt=False)
    odd = np.array([lab[3].count("z") % 2 == 1 for lab in labels])
    weight = (c[odd] ** 2).sum(axis=0) / (c**2).sum(axis=0)
    pi = [k for k in range(c.shape[1]) if weight[k] > 0.99]
    occ_pi = [k for k in pi if k < nocc][-5:]
    vir_pi = [k for k in pi if k >= nocc][:5]
    sel = occ_pi + vir_pi
    eri = ao2mo.restore(1, ao2mo.full(mol, c[:, sel]), len(sel))
    sums = {"pi10_eri.json": write("pi10_eri.json", ften(eri, "hermitian-chemist"))}
    meta = {
        "basis": "cc-pvdz",
        "atom": NAPHTHALENE.strip(),
        "orbitals": sel,
        "e_hf": float(mf.e_tot),
        "sha256": sums,
    }
    (OUT / "pi10.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print("pi10", sel, file=sys.stderr)


JOBS = {
    "hf_sto3g": lambda: amplitude_fixture("hf_sto3g", "H 0 0 0; F 0 0 1.6", "sto-3g"),
    "h4_631g": lambda: amplitude_fixture("h4_631g", "H 0 0 0; H 0 0 1.6; H 0 0 3.2; H 0 0 4.8", "6-31g"),
    "o2_sto3g": lambda: open_shell_fixture("o2_sto3g", "O 0 0 0; O 0 0 2.55", "sto-3g", 2),
    "pi10": pi_fixture,
}


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    # optional arguments pick a subset, e.g. `gen_fixtures.py o2_sto3g`
    for name in sys.argv[1:] or JOBS:
        JOBS[name]()
