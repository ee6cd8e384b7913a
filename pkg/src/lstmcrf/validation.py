"""Input checks for the estimator API.

``X`` is a sequence of sentences, each a non-empty sequence of token strings;
``y`` is a parallel sequence of IOB tag-string sequences.
"""

from numbers import Real

from .corpus import split_tag
from .exceptions import ConfigError, ParseError


def check_sentences(X, y=None, name="X"):
    """Return ``(X, y)`` as lists of lists, validated."""
    if isinstance(X, str) or not hasattr(X, "__len__"):
        raise ConfigError(f"{name} must be a sequence of token sequences")
    X = [list(s) for s in X]
    for i, tokens in enumerate(X):
        if not tokens:
            raise ConfigError(f"{name}[{i}] is empty; every sentence needs a token")
        for tok in tokens:
            if not isinstance(tok, str) or not tok:
                raise ConfigError(f"{name}[{i}] holds a non-string or empty token: {tok!r}")
    if y is None:
        return X, None
    y = [list(t) for t in y]
    if len(y) != len(X):
        raise ConfigError(f"{name} has {len(X)} sentences but y has {len(y)}")
    for i, (tokens, tags) in enumerate(zip(X, y)):
        if len(tokens) != len(tags):
            raise ConfigError(f"sentence {i}: {len(tokens)} tokens but {len(tags)} tags")
        for tag in tags:
            try:
                split_tag(tag)
            except ParseError as exc:
                raise ConfigError(f"sentence {i}: {exc}") from None
    return X, y


def check_scalar(value, name, kind=Real, low=None, high=None, include_low=True, include_high=True):
    if isinstance(value, bool) or not isinstance(value, kind):
        raise ConfigError(f"{name} must be {kind.__name__}, got {value!r}")
    if low is not None and (value < low or (value == low and not include_low)):
        raise ConfigError(f"{name}={value} is below the allowed range")
    if high is not None and (value > high or (value == high and not include_high)):
        raise ConfigError(f"{name}={value} is above the allowed range")
    return value


def check_choice(value, name, choices):
    if value not in choices:
        raise ConfigError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value

