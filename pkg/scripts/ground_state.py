"""Imaginary-time ground state of a worked model, compared with exact diagonalisation."""
import argparse

from qlink.chain import QLinkChain
from qlink.model import worked_models
from qlink.mpdo.evolve import ground_state_search
from qlink.mpdo.state import random_state
from qlink.oracle import dense_hamiltonian, enumerate_constrained, ground_state


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--model", default="u1_n1", choices=sorted(worked_models()))
    p.add_argument("-L", type=int, default=6)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=0.5)
    p.add_argument("--g2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    spec = worked_models(args.L)[args.model].with_params(J=args.J, mass=args.mass, g2=args.g2)
    chain = QLinkChain(spec)
    res = ground_state_search(random_state(chain, 4, seed=args.seed))
    for s in res.stages:
        print(s)
    e0, _ = ground_state(dense_hamiltonian(enumerate_constrained(chain.basis), chain.gates))
    print(f"TEBD  {res.energy:.12f}\nexact {e0:.12f}\ndiff  {abs(res.energy - e0):.2e}")


if __name__ == "__main__":
    main()
