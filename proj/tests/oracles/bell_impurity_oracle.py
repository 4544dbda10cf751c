"""Dense-diagonalization oracle for the bell-impurity scenario.

Builds H+J for the projector chain with an anchored impurity at both ends
(boundary release + Bell projector + quasi-exponential sigma^x tails) and
prints the local trace distances |rho_Phi - mu|_{B_1(x)} used as frozen
regression fixtures.
"""
import numpy as np
import itertools, sys

def kron_all(ops):
    out = np.array([[1.0+0j]])
    for o in ops:
        out = np.kron(out, o)
    return out

I2 = np.eye(2, dtype=complex)
SX = np.array([[0,1],[1,0]], dtype=complex)
SZ = np.array([[1,0],[0,-1]], dtype=complex)
NUP = np.array([[1,0],[0,0]], dtype=complex)   # |up><up| ; basis order (up, down)

def embed(L, ops_by_site):
    mats = [ops_by_site.get(i, I2) for i in range(L)]
    return kron_all(mats)

def build(L, c=0.5, g=0.25, lam=1.0, K=6, bell=True, tails=True):
    dim = 2**L
    H = np.zeros((dim, dim), dtype=complex)
    for i in range(L):
        H += embed(L, {i: NUP})
    J = -embed(L, {0: NUP}) - embed(L, {L-1: NUP})
    if bell:
        up = np.array([1,0], dtype=complex); dn = np.array([0,1], dtype=complex)
        b = (np.kron(up,up) + np.kron(dn,dn))/np.sqrt(2)
        Pb = np.outer(b, b.conj())
        # embed 2-site op on sites (0, L-1)
        full = np.zeros((dim,dim), dtype=complex)
        # sites ordered 0..L-1, site 0 most significant
        rest = L-2
        M = Pb.reshape(2,2,2,2)  # (s0,sL | s0', sL')
        # build via kron trick: P acts on first and last qubit
        for s0 in range(2):
            for sL in range(2):
                for t0 in range(2):
                    for tL in range(2):
                        v = M[s0,sL,t0,tL]
                        if abs(v) < 1e-300: continue
                        ops = {0: np.zeros((2,2),dtype=complex), L-1: np.zeros((2,2),dtype=complex)}
                        ops[0][s0,t0] = 1; ops[L-1][sL,tL] = 1
                        full += v*embed(L, ops)
        J += -np.exp(-c*L)*full
    if tails:
        for k in range(1, min(K, L-2)+1):
            coeff = g*np.exp(-lam*(k-1))
            J += -coeff*(embed(L, {0:SX, k:SX}) + embed(L, {L-1:SX, L-1-k:SX}))
    return H, J

def reduced(psi, L, keep):
    keep = sorted(keep); rest = [i for i in range(L) if i not in keep]
    perm = keep + rest
    T = psi.reshape([2]*L).transpose(perm).reshape(2**len(keep), 2**len(rest))
    return T @ T.conj().T

def trace_distance(A, B):
    w = np.linalg.eigvalsh(A-B)
    return np.abs(w).sum()

def run(L, **kw):
    H, J = build(L, **kw)
    M = H + J
    assert np.linalg.norm(M - M.conj().T) < 1e-12
    w, V = np.linalg.eigh(M.real)  # real symmetric
    print(f"L={L} params={kw}")
    print("  lowest eigenvalues:", np.array2string(w[:6], precision=10))
    gap01 = w[1]-w[0]
    print(f"  ground energy {w[0]:.12f}  gap to next {gap01:.6e}")
    phi = V[:,0].astype(complex)
    mu = np.zeros(2**L); mu[2**L-1] = 1.0  # all-down is last index (down=1)
    mu_psi = mu.astype(complex)
    rows = []
    for x in range(1, 6 if L >= 12 else L//2):
        ball = [y for y in range(L) if abs(y-x) <= 1]
        r_phi = reduced(phi, L, ball)
        r_mu = reduced(mu_psi, L, ball)
        d = trace_distance(r_phi, r_mu)
        rows.append((x, d))
        print(f"  x={x} B_1 sites={ball} dist={d:.12e}")
    ds = [d for _, d in rows]
    print("  strictly decreasing:", all(ds[i] > ds[i+1] for i in range(len(ds)-1)))
    return w, rows

if __name__ == "__main__":
    run(10)
    w, rows = run(12)
