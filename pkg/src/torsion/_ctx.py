from __future__ import annotations

import contextlib
import contextvars
import logging
import time
import typing

from collections.abc import Iterator, Mapping


class _Logger(typing.Protocol):  # pragma: no cover
    def __call__(self, message: str, *, origin: tuple[str, ...] | None = None) -> None: ...


_package_name = __spec__.parent  # type: ignore[name-defined]
_default_logger = logging.getLogger(_package_name)

DEFAULT_BUDGET = 10_000_000


def _log_default(message: str, *, origin: tuple[str, ...] | None = None) -> None:
    if origin is None:
        _default_logger.log(logging.INFO, message, stacklevel=2)


LOGGER = contextvars.ContextVar('LOGGER', default=_log_default)
VERBOSITY = contextvars.ContextVar('VERBOSITY', default=0)
BUDGET = contextvars.ContextVar('BUDGET', default=DEFAULT_BUDGET)


def resolve_budget(budget: int | None) -> int:
    return BUDGET.get() if budget is None else budget


def log_cell(check: str, params: Mapping[str, object], status: str) -> None:
    if not VERBOSITY.get():
        return

    rendered = ' '.join(f'{key}={value}' for key, value in params.items())
    LOGGER.get()(f'{check} [{rendered}] {status}', origin=('verify', 'cell'))


@contextlib.contextmanager
def timed(label: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        if VERBOSITY.get():
            elapsed = time.perf_counter() - start
            LOGGER.get()(f'{label} took {elapsed:.3f}s', origin=('timing', label))


if typing.TYPE_CHECKING:
    log: _Logger
    verbosity: int

else:

    def __getattr__(name):
        if name == 'log':
            return LOGGER.get()
        elif name == 'verbosity':
            return VERBOSITY.get()
        raise AttributeError(name)  # pragma: no cover


__all__ = [
    'BUDGET',
    'DEFAULT_BUDGET',
    'log_cell',
    'log',
    'LOGGER',
    'resolve_budget',
    'timed',
    'verbosity',
    'VERBOSITY',
]
