"""Shared builders for tests: fast node configs and onboarding shortcuts."""

from __future__ import annotations

from vaxledger.node import Node, NodeConfig

# mining at zero difficulty and a tiny scrypt cost keep the suite quick;
# proof-of-work strength has its own dedicated tests
FAST = dict(difficulty=0, kdf_log2_n=4, max_txs_per_block=100)

NIDS = frozenset(f"NID{i:03d}" for i in range(200))
LICENCES = frozenset(
    {f"LAB{i:02d}" for i in range(20)} | {f"HOSP{i:02d}" for i in range(20)}
)


def fast_config(divisions=None, **overrides) -> NodeConfig:
    kwargs = dict(
        FAST,
        authority_wallet="0xA0",
        authority_password="boot-secret",
        authority_name="Test Authority",
        nid_allowlist=NIDS,
        licence_allowlist=LICENCES,
    )
    if divisions is not None:
        kwargs["divisions"] = tuple(divisions)
    kwargs.update(overrides)
    return NodeConfig(**kwargs)


def fast_node(divisions=None, **overrides) -> Node:
    return Node(fast_config(divisions, **overrides))


def authority_of(node: Node) -> str:
    return node.registry.authority_sid


def onboard_holder(node: Node, wallet: str, division: str, nid: str = "NID000",
                   name: str | None = None, age: int = 30) -> str:
    sid = node.request_signup(
        "Holder",
        wallet,
        {"name": name or f"Holder {wallet}", "age": age, "division": division, "nid": nid},
        f"pw-{wallet}",
    )
    status, _ = node.approve_signup(authority_of(node), sid, "approve")
    assert status.value == "Approved", f"holder onboarding failed: {status}"
    return sid


def onboard_issuer(node: Node, wallet: str = "0xISS", licence: str = "LAB00",
                   name: str = "Test Lab") -> str:
    sid = node.request_signup(
        "Issuer", wallet, {"name": name, "licence": licence}, f"pw-{wallet}"
    )
    status, _ = node.approve_signup(authority_of(node), sid, "approve")
    assert status.value == "Approved"
    return sid


def onboard_provider(node: Node, wallet: str = "0xPRV", licence: str = "HOSP00",
                     name: str = "Test Hospital") -> str:
    sid = node.request_signup(
        "VaccineProvider", wallet, {"name": name, "licence": licence}, f"pw-{wallet}"
    )
    status, _ = node.approve_signup(authority_of(node), sid, "approve")
    assert status.value == "Approved"
    return sid
