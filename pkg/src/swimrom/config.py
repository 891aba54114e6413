"""Experiment configuration: a small key = value text format.

One assignment per line, ``#`` starts a comment.  Unknown keys are
rejected so typos fail loudly instead of silently running defaults.
"""

from dataclasses import dataclass, fields


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    swimmer: str = "bacterium"          # bacterium | eukaryote
    resolution: str = "desk"            # desk | paper
    mode: str = "split"                 # split | monolithic
    pod_threshold: float = 1.0 - 1e-12
    eim_threshold: float = 1.0 - 1e-13
    greedy_tolerance: float = 0.0
    seed: int = 0
    out: str = "runs"
    # parameter domain and grids (helical swimmer)
    domain_min: float = 0.4
    domain_max: float = 4.0
    train_n: int = 41                   # training samples, turn count axis
    train_r: int = 5                    # training samples, head radius axis
    coarse_step: float = 0.2
    fine_step: float = 0.05
    n_lambda: float = 2.4               # single-query tail turns
    r_head: float = 0.8                 # single-query head radius
    # stroke swimmer
    frames: int = 240
    n_training: int = 12
    # evaluation
    held_out: int = 10
    verify: str = "none"                # fom | none

    def validate(self):
        if self.swimmer not in ("bacterium", "eukaryote"):
            raise ConfigError(f"unknown swimmer {self.swimmer!r}")
        if self.resolution not in ("desk", "paper"):
            raise ConfigError(f"unknown resolution {self.resolution!r}")
        if self.mode not in ("split", "monolithic"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.pod_threshold <= 1.0:
            raise ConfigError("pod_threshold must lie in (0, 1]")
        if not 0.0 < self.eim_threshold <= 1.0:
            raise ConfigError("eim_threshold must lie in (0, 1]")
        if not self.domain_min < self.domain_max:
            raise ConfigError("empty parameter domain")
        if self.train_n < 1 or self.train_r < 1:
            raise ConfigError("empty training grid")
        if self.frames < 4:
            raise ConfigError("need at least 4 stroke frames")
        if self.n_training < 2:
            raise ConfigError("need at least 2 training frames")
        if self.verify not in ("fom", "none"):
            raise ConfigError(f"unknown verify setting {self.verify!r}")
        return self


_CASTS = {"str": str, "int": int, "float": float, str: str, int: int,
          float: float}
_FIELDS = {f.name: _CASTS[f.type] for f in fields(ExperimentConfig)}


def parse_config(text):
    """Parse key = value text into a validated ExperimentConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _FIELDS[key](val)
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: bad value for {key!r}: {val!r}") from exc
    return ExperimentConfig(**values).validate()


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_text(cfg):
    """Canonical text form, used for hashing and for the run manifest."""
    lines = [f"{f.name} = {getattr(cfg, f.name)}"
             for f in fields(ExperimentConfig)]
    return "\n".join(lines) + "\n"
