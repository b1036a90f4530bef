import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wban_exposure.config import ConfigError, RunConfig, parse_config, serialize_config
from wban_exposure.geometry import NodePosition
from wban_exposure.protocol import Traffic
from wban_exposure.sweep import SweepKind


def test_empty_document_gives_table_defaults():
    c = parse_config("")
    assert c == RunConfig()
    assert c.radio.frequency == 2.4 and c.radio.bandwidth == 4e6
    assert c.radio.temperature == 295 and c.radio.noise_figure == 19.2
    assert c.radio.max_rate == 10e6
    assert c.tissue.permittivity == 39.2 and c.tissue.conductivity == 1.8
    assert c.tissue.penetration_depth == 0.113
    assert c.tx_power == 15 and c.relay_power == 15
    assert c.antennas["tx"].gain == 1.7 and c.antennas["relay"].gain == 8
    assert c.antennas["tx"].beamwidth_3db == 93
    assert (c.grid.length_cm, c.grid.width_cm) == (16, 15)


def test_provenance_flags_assumed_defaults():
    c = parse_config("")
    flagged = set(c.assumed_defaults())
    assert {"tissue.mass_density", "alpha", "limits.pd_limit",
            "antenna.tx.element_separation"} <= flagged
    assert c.provenance["radio.bandwidth"] == "reference"
    c2 = parse_config("alpha = 2.4\n[tissue]\nmass_density = 1050\n")
    assert "alpha" not in c2.assumed_defaults()
    assert c2.provenance["tissue.mass_density"] == "user"


def test_overrides_and_units():
    c = parse_config('[scene]\ntx_power = -5\nrelay_power = "-7 dBm"\ntraffic = "emergency"\n'
                     '[radio]\nbandwidth = "2 MHz"\nfrequency = "2400 MHz"\n'
                     '[tissue]\npenetration_depth = "113 mm"\n')
    assert c.tx_power == -5 and c.relay_power == -7
    assert c.traffic is Traffic.EMERGENCY
    assert c.radio.bandwidth == 2e6
    assert c.radio.frequency == pytest.approx(2.4)
    assert c.tissue.penetration_depth == pytest.approx(0.113)


@pytest.mark.parametrize("doc,key", [
    ("[radio]\nbandwidth = -1\n", "bandwidth"),
    ("[radio]\nbandwidth = \"4 dBm\"\n", "bandwidth"),
    ("[radio]\nbogus = 1\n", "bogus"),
    ("wat = 3\n", "wat"),
    ("[antenna.head]\ngain = 1\n", "head"),
    ("[scene]\ntx = [0, 1]\n", "scene.tx"),
    ("[scene]\ntx = [1]\n", "scene.tx"),
    ("[scenario]\nkind = \"orbit\"\n", "scenario.kind"),
    ("[protocol]\nbackoff_nodes = \"rx\"\n", "backoff_nodes"),
    ("[grid]\nlength_cm = 1\n", "grid"),
    ("alpha = 0\n", "alpha"),
    ("[tissue]\nconductivity = true\n", "conductivity"),
])
def test_errors_name_the_key(doc, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(doc)


def test_malformed():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("[radio\n")


def test_relay_none_and_scene():
    c = parse_config("[scene]\nrelay = []\n")
    assert c.relay is None and c.scene().relay is None


def test_scenario_fixed_positions():
    c = parse_config('[scenario]\nkind = "rx_sweep"\ntx = [2, 2]\nprotocol = false\n')
    s = c.sweep_scenario()
    assert s.kind is SweepKind.RX and not s.protocol_enabled
    assert s.fixed_positions == {"tx": (2, 2), "relay": (12, 13)}


def test_round_trip_defaults():
    c = parse_config("")
    assert parse_config(serialize_config(c)) == c


positions = st.builds(NodePosition, st.integers(1, 16), st.integers(1, 15))


@settings(max_examples=40)
@given(
    st.floats(-40, 30), st.floats(0.5, 6), st.floats(1e5, 1e8), st.floats(1, 20),
    positions, st.one_of(st.none(), positions), st.sampled_from(list(SweepKind)),
    st.booleans(), st.sampled_from(["both", "tx", "relay"]),
)
def test_round_trip(tx_power, alpha, bw, gain, tx, relay, kind, protocol, nodes):
    base = parse_config("")
    c = dataclasses.replace(
        base,
        tx_power=tx_power,
        alpha=alpha,
        radio=dataclasses.replace(base.radio, bandwidth=bw),
        antennas={**base.antennas, "relay": dataclasses.replace(base.antennas["relay"], gain=gain)},
        tx=tx,
        relay=relay,
        scenario_kind=kind,
        protocol_enabled=protocol,
        settings=dataclasses.replace(base.settings, backoff_nodes=nodes),
    )
    assert parse_config(serialize_config(c)) == c
