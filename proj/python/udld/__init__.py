"""2-layered D2D THz indoor coverage simulator.

The heavy lifting lives in the compiled ``_core`` module; this package adds
small conveniences for config handling.
"""

import json as _json

from ._core import (  # noqa: F401
    AbsorptionTable,
    ConfigError,
    LearningConfig,
    LinkBudgetParams,
    PolicyWeights,
    Rng,
    __version__,
    absorption_loss_db,
    antenna_gain_dbi,
    calibrate_absorption,
    capacity_bps,
    decay_epsilon,
    default_config_json,
    features_model1,
    features_model2,
    max_range_m,
    min_beamwidth_deg,
    q_value,
    received_power_dbm,
    reward,
    run_simulation,
    select_action,
    spreading_loss_db,
    td_update,
)


def default_config():
    """The built-in experiment configuration as a dict."""
    return _json.loads(default_config_json())


def simulate(config=None, **top_level_overrides):
    """Run a simulation from a config dict (defaults when omitted).

    Keyword arguments override top-level blocks, e.g.
    ``simulate(simulation={"episodes": 20, "seed": 3})``.
    """
    doc = default_config() if config is None else dict(config)
    for block, fields in top_level_overrides.items():
        doc.setdefault(block, {}).update(fields)
    return run_simulation(_json.dumps(doc))
