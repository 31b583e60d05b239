"""Smoke test for the ising_qite_py extension module.

Build the extension and put it on the import path, for example:

    cargo build --release -p ising-qite-py --features extension-module
    cp target/release/libising_qite_py.so python/ising_qite_py.so
    python3 python/smoke_test.py
"""

import math

import ising_qite_py as iq


def main():
    chain = iq.IsingModel([2])
    assert chain.num_qubits == 2
    assert chain.hamiltonian() == [("Z1Z0", -1.0)]
    assert chain.num_params(1) == 2

    beta = 0.5
    point = chain.exact_curve([beta])[0]
    assert abs(point.cv - beta**2 / math.cosh(beta) ** 2 / 2) < 1e-12
    assert abs(point.chi - beta * (1 + math.tanh(beta))) < 1e-12
    assert abs(chain.imaginary_time_point(beta).cv - point.cv) < 1e-10

    trace = chain.evolve(layers=1, k_max=1.0, record_stride=250)
    assert abs(-trace[-1].energy - math.tanh(1.0)) < 1e-2

    square = iq.IsingModel([2, 2], alpha="inf")
    qite, exact = iq.sweep(square, layers=2, k_max=1.0)
    assert len(qite) == len(exact) == 51
    assert max(abs(a.cv - b.cv) for a, b in zip(qite, exact)) < 0.05

    k_peak, _, at_boundary = iq.peak_locate(iq.IsingModel([3, 3]).exact_curve([0.01 * k for k in range(101)]))
    assert not at_boundary and 0.38 < k_peak < 0.43

    circuit = chain.measure_circuit(0.5, 0.002)
    assert len(circuit) == 250

    cost = {name: value for name, _, _, value in iq.cost_estimate(2, 3, "full")}
    assert cost["time"] == 1259712
    cost = {name: value for name, _, _, value in iq.cost_estimate(2, 3, "dual")}
    assert cost["time"] == 11664

    try:
        iq.IsingModel([3, 3], alpha="-1")
    except ValueError:
        pass
    else:
        raise AssertionError("negative alpha accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
