"""Independent fixtures: ball-growth constants and F-function constants."""
import numpy as np
from collections import deque

def bfs_all(n, adj):
    D = np.full((n,n), 10**9, dtype=int)
    for s in range(n):
        D[s,s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if D[s,v] > D[s,u]+1:
                    D[s,v] = D[s,u]+1
                    q.append(v)
    return D

def grid(w,h):
    n = w*h; adj = [[] for _ in range(n)]
    for y in range(h):
        for x in range(w):
            i = y*w+x
            if x+1 < w: adj[i].append(i+1); adj[i+1].append(i)
            if y+1 < h: adj[i].append(i+w); adj[i+w].append(i)
    return n, adj

def chain(L):
    adj = [[] for _ in range(L)]
    for i in range(L-1):
        adj[i].append(i+1); adj[i+1].append(i)
    return L, adj

def cgamma(n, adj, d):
    D = bfs_all(n, adj)
    diam = D.max()
    best = 0.0
    for x in range(n):
        for r in range(1, diam+1):
            ball = int((D[x] <= r).sum())
            best = max(best, (ball-1)/r**d)
    return best, diam

n, adj = grid(5,5)
c, diam = cgamma(n, adj, 2.0)
print(f"5x5 grid d=2: C_Gamma = {c!r} (diam {diam})")
n, adj = chain(20)
print("chain20 d=1: C_Gamma =", cgamma(n, adj, 1.0)[0])

# F-function constants on a 12-chain for F(r) = e^-r/(1+r)^2
n, adj = chain(12)
D = bfs_all(n, adj)
F = lambda r: np.exp(-r)/(1+r)**2
cf = 0.0
for x in range(n):
    for y in range(n):
        s = sum(F(D[x,z])*F(D[z,y]) for z in range(n))
        cf = max(cf, s/F(D[x,y]))
cfp = max(sum(F(D[x,y]) for y in range(n)) for x in range(n))
print(f"12-chain C_F = {cf!r}  C_F' = {cfp!r}")
