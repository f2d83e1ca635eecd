import numpy as np
import pytest

from creditnet.core import (BankAttributes, BipartiteNetwork, FirmAttributes,
                            Sample)


def make_network(weights, firm_prefix="F", bank_prefix="B"):
    weights = np.asarray(weights, dtype=float)
    nf, nb = weights.shape
    return BipartiteNetwork(
        tuple(f"{firm_prefix}{i}" for i in range(nf)),
        tuple(f"{bank_prefix}{j}" for j in range(nb)),
        weights,
    )


def make_sample(weights, s_bal=None, t_bal=None, label="test"):
    net = make_network(weights)
    s_net = net.weights.sum(axis=1)
    t_net = net.weights.sum(axis=0)
    if s_bal is None:
        s_bal = s_net
    if t_bal is None:
        t_bal = t_net
    firm_attrs = {
        fid: FirmAttributes(
            balance_strength=float(s_bal[i]),
            total_assets=float(max(s_net[i], 1.0) * 2.0),
            leverage=0.5 + 0.01 * i,
            roa=1.0 - 0.1 * i,
            tangibility=min(0.1 + 0.02 * i, 1.0),
        )
        for i, fid in enumerate(net.firm_ids)
    }
    bank_attrs = {
        bid: BankAttributes(
            balance_strength=float(t_bal[j]),
            total_assets=float(max(t_net[j], 1.0) * 3.0),
            leverage=10.0 + 0.1 * j,
            roa=0.5 + 0.05 * j,
        )
        for j, bid in enumerate(net.bank_ids)
    }
    return Sample(net, firm_attrs, bank_attrs, label=label)


@pytest.fixture
def small_net():
    return make_network([[1.0, 0.0], [2.0, 3.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
