"""Search Korobov generators g (vector (1, g, g^2, ...) mod n) for the lattice table.

For each prime n and each dimension d <= 24 picks the g in [2, n/2] minimizing the
P2 worst-case error of the rank-1 lattice in the weighted Korobov space with product
weights gamma_j = 1 / j^2. Unweighted P2 degenerates beyond about ten dimensions
(it prefers g = 2), so the weights keep low-order projections well spread.
Prints a Rust array literal per prime.
"""
import numpy as np

PRIMES = [1021, 4093, 16381]
DMAX = 24


def search(n):
    i = np.arange(n, dtype=np.int64)
    best = np.full(DMAX, np.inf)
    best_g = np.zeros(DMAX, dtype=np.int64)
    for g in range(2, n // 2 + 1):
        prod = np.ones(n)
        z = 1
        for d in range(DMAX):
            x = (i * z % n) / n
            prod *= 1.0 + 2.0 * np.pi**2 * (x * x - x + 1.0 / 6.0) / (d + 1) ** 2
            p2 = prod.mean() - 1.0
            if p2 < best[d]:
                best[d] = p2
                best_g[d] = g
            z = z * g % n
    return best_g, best


if __name__ == "__main__":
    for n in PRIMES:
        g, e = search(n)
        print(f"// n = {n}")
        print("[" + ", ".join(str(int(v)) for v in g) + "],")
        print("// P2: " + ", ".join(f"{v:.3e}" for v in e))
