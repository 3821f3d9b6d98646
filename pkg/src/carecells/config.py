"""Line-oriented experiment configuration.

The format is flat ``key = value`` lines; ``#`` starts a comment and blank
lines are ignored. Sweep axes use dotted keys, e.g.
``sweep.provider_rate = 0.1,0.2,0.3``. Recognized keys:

  n               grid side length (int, >= 2)            default 30
  mode            static | dynamic                        default static
  client_rate     initial client share (float)            default 0.3
  provider_rate   initial provider share (float)          default 0.3
  value_min       smallest req/pro value (int >= 1)       default 1
  value_max       largest req/pro value (int)             default 10
  distant_help    true | false                            default false
  reuse           reusable | oneshot                      default reusable
  mutation        count:<k> | fraction:<f>                default count:1
  p_client        mutation target-role probability        default 0.25
  p_provider      probability, or "balance" meaning       default 0.25
                  1 - p_neutral - p_client
  p_neutral       probability                             default 0.50
  warmup          dynamic warm-up steps                   default 5000
  interval        steps between samples                   default 50
  samples         number of samples                       default 100
  max_steps       static-mode step budget                 default 100000
  seed            master seed (64-bit int)                default 0
  replicates      runs per sweep point (int >= 1)         default 10
  output          CSV output path                         default stdout

Mutation settings apply to dynamic mode but are validated regardless, so a
bad probability triple is rejected even in a static config. Sweepable keys:
n, client_rate, provider_rate, p_client, p_provider, p_neutral,
distant_help, mutation, value_min, value_max.
"""

from dataclasses import dataclass, replace

from .driver import Mode, MutationConfig, RunConfig
from .errors import ConfigError
from .grid import InitRates, ReusePolicy, UniformIntValues
from .matching import MatchPolicy

BALANCE = "balance"

SWEEPABLE = (
    "n",
    "client_rate",
    "provider_rate",
    "p_client",
    "p_provider",
    "p_neutral",
    "distant_help",
    "mutation",
    "value_min",
    "value_max",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """A base run plus sweep axes, replicates and the master seed."""

    base: RunConfig
    sweeps: tuple[tuple[str, tuple], ...] = ()
    replicates: int = 10
    master_seed: int = 0
    output: str | None = None
    # p_provider follows 1 - p_neutral - p_client at every sweep point.
    balance_provider_prob: bool = False

    def validate(self) -> None:
        self.base.validate()
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        for name, values in self.sweeps:
            if name not in SWEEPABLE:
                raise ConfigError(f"parameter '{name}' is not sweepable")
            if not values:
                raise ConfigError(f"sweep axis '{name}' has no values")


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError("expected true or false")


def _parse_mutation_rule(text: str) -> tuple[str, float]:
    kind, _, amount = text.partition(":")
    if kind == "count":
        return ("count", int(amount))
    if kind == "fraction":
        return ("fraction", float(amount))
    raise ValueError("expected count:<k> or fraction:<f>")


def format_mutation_rule(mc: MutationConfig) -> str:
    if mc.count is not None:
        return f"count:{mc.count}"
    return f"fraction:{mc.fraction!r}"


# key -> value parser; applied both to plain keys and sweep lists
_PARSERS = {
    "n": int,
    "mode": lambda t: Mode(t),
    "client_rate": float,
    "provider_rate": float,
    "value_min": int,
    "value_max": int,
    "distant_help": _parse_bool,
    "reuse": lambda t: ReusePolicy(t),
    "mutation": _parse_mutation_rule,
    "p_client": float,
    "p_provider": float,
    "p_neutral": float,
    "warmup": int,
    "interval": int,
    "samples": int,
    "max_steps": int,
    "seed": int,
    "replicates": int,
    "output": str,
}


def apply_param(config: RunConfig, name: str, value) -> RunConfig:
    """Return a copy of ``config`` with one sweepable parameter replaced."""
    if name == "n":
        return replace(config, n=value)
    if name == "client_rate":
        return replace(config, rates=InitRates(value, config.rates.provider_rate))
    if name == "provider_rate":
        return replace(config, rates=InitRates(config.rates.client_rate, value))
    if name == "value_min":
        return replace(config, values=UniformIntValues(value, config.values.hi))
    if name == "value_max":
        return replace(config, values=UniformIntValues(config.values.lo, value))
    if name == "distant_help":
        return replace(config, match=replace(config.match, distant_help=value))
    if name == "mutation":
        kind, amount = value
        mc = config.effective_mutation()
        if kind == "count":
            mc = replace(mc, count=int(amount), fraction=None)
        else:
            mc = replace(mc, count=None, fraction=float(amount))
        return replace(config, mutation=mc)
    if name in ("p_client", "p_provider", "p_neutral"):
        mc = replace(config.effective_mutation(), **{name: value})
        return replace(config, mutation=mc)
    raise ConfigError(f"parameter '{name}' is not sweepable")


def rebalance_provider_prob(config: RunConfig) -> RunConfig:
    """Recompute p_provider as 1 - p_neutral - p_client."""
    mc = config.effective_mutation()
    p = 1.0 - mc.p_neutral - mc.p_client
    if p < -1e-9:
        raise ConfigError(
            f"balanced p_provider is negative (p_client={mc.p_client}, "
            f"p_neutral={mc.p_neutral})"
        )
    return replace(config, mutation=replace(mc, p_provider=max(0.0, p)))


def parse_config(text: str) -> ExperimentSpec:
    """Parse config text into a validated ExperimentSpec.

    Unknown keys, duplicate keys, malformed values and violated invariants
    raise ConfigError naming the offending line and key.
    """
    plain: dict = {}
    sweeps: list[tuple[str, tuple]] = []
    seen: set[str] = set()
    balance = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = (part.strip() for part in line.partition("="))
        if eq != "=" or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        seen.add(key)

        if key.startswith("sweep."):
            param = key[len("sweep.") :]
            if param not in SWEEPABLE:
                raise ConfigError(
                    f"line {lineno}: parameter '{param}' is not sweepable"
                )
            try:
                parsed = tuple(
                    _PARSERS[param](item.strip()) for item in value.split(",")
                )
            except (ValueError, KeyError) as exc:
                raise ConfigError(
                    f"line {lineno}: invalid value in sweep '{param}': {exc}"
                ) from None
            if not parsed:
                raise ConfigError(f"line {lineno}: sweep '{param}' has no values")
            sweeps.append((param, parsed))
            continue

        if key == "p_provider" and value == BALANCE:
            balance = True
            continue
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        try:
            plain[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: invalid value for '{key}': {exc}"
            ) from None

    mode = plain.get("mode", Mode.STATIC)
    mutation = None
    mutation_keys = {"mutation", "p_client", "p_provider", "p_neutral"}
    if mode is Mode.DYNAMIC or balance or (mutation_keys & plain.keys()):
        kind, amount = plain.get("mutation", ("count", 1))
        p_client = plain.get("p_client", 0.25)
        p_neutral = plain.get("p_neutral", 0.50)
        if balance:
            p_provider = 1.0 - p_neutral - p_client
            if p_provider < -1e-9:
                raise ConfigError("balanced p_provider is negative")
            p_provider = max(0.0, p_provider)
        else:
            p_provider = plain.get("p_provider", 0.25)
        mutation = MutationConfig(
            count=int(amount) if kind == "count" else None,
            fraction=float(amount) if kind == "fraction" else None,
            p_client=p_client,
            p_provider=p_provider,
            p_neutral=p_neutral,
        )

    base = RunConfig(
        n=plain.get("n", 30),
        rates=InitRates(
            plain.get("client_rate", 0.3), plain.get("provider_rate", 0.3)
        ),
        values=UniformIntValues(
            plain.get("value_min", 1), plain.get("value_max", 10)
        ),
        match=MatchPolicy(distant_help=plain.get("distant_help", False)),
        reuse=plain.get("reuse", ReusePolicy.REUSABLE),
        mode=mode,
        mutation=mutation,
        warmup_steps=plain.get("warmup", 5000),
        sample_interval=plain.get("interval", 50),
        sample_count=plain.get("samples", 100),
        max_steps=plain.get("max_steps", 100_000),
        seed=plain.get("seed", 0),
    )
    spec = ExperimentSpec(
        base=base,
        sweeps=tuple(sweeps),
        replicates=plain.get("replicates", 10),
        master_seed=plain.get("seed", 0),
        output=plain.get("output"),
        balance_provider_prob=balance,
    )
    spec.validate()
    return spec


def to_config_text(spec: ExperimentSpec) -> str:
    """Emit config text that parses back to an equal spec."""
    base = spec.base
    lines = [
        f"n = {base.n}",
        f"mode = {base.mode.value}",
        f"client_rate = {base.rates.client_rate!r}",
        f"provider_rate = {base.rates.provider_rate!r}",
        f"value_min = {base.values.lo}",
        f"value_max = {base.values.hi}",
        f"distant_help = {'true' if base.match.distant_help else 'false'}",
        f"reuse = {base.reuse.value}",
    ]
    if base.mutation is not None:
        mc = base.mutation
        lines.append(f"mutation = {format_mutation_rule(mc)}")
        lines.append(f"p_client = {mc.p_client!r}")
        if spec.balance_provider_prob:
            lines.append("p_provider = balance")
        else:
            lines.append(f"p_provider = {mc.p_provider!r}")
        lines.append(f"p_neutral = {mc.p_neutral!r}")
    lines += [
        f"warmup = {base.warmup_steps}",
        f"interval = {base.sample_interval}",
        f"samples = {base.sample_count}",
        f"max_steps = {base.max_steps}",
        f"seed = {spec.master_seed}",
        f"replicates = {spec.replicates}",
    ]
    if spec.output is not None:
        lines.append(f"output = {spec.output}")
    for name, values in spec.sweeps:
        if name == "mutation":
            rendered = ",".join(
                f"count:{a}" if k == "count" else f"fraction:{a!r}"
                for k, a in values
            )
        elif name == "distant_help":
            rendered = ",".join("true" if v else "false" for v in values)
        else:
            rendered = ",".join(repr(v) for v in values)
        lines.append(f"sweep.{name} = {rendered}")
    return "\n".join(lines) + "\n"
