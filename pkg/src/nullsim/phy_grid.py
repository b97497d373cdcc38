"""Resource-block and subcarrier grids over a shared 2.4 GHz channel.

The LTE downlink is organized in 180 kHz reduced resource blocks, the WiFi
OFDM channel in 312.5 kHz subcarriers.  Both grids are evenly spaced and
symmetric about their center frequency.  All frequencies are integer hertz
so nearest-neighbour lookups have exact, reproducible tie behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_CENTER_HZ = 2_412_000_000


def _grid_centers(center_hz: int, n: int, bw_hz: int) -> list[int]:
    # center of slot i is center + (2i - (n-1)) * bw/2, exact in integers
    return [center_hz + (2 * i - (n - 1)) * bw_hz // 2 for i in range(n)]


def _check_grid(center_hz: int, n: int, bw_hz: int) -> None:
    if n < 1:
        raise ValueError("grid needs at least one slot")
    if bw_hz <= 0:
        raise ValueError("slot bandwidth must be positive")
    if bw_hz % 2:
        raise ValueError("slot bandwidth must be an even number of hertz")
    if center_hz <= 0:
        raise ValueError("center frequency must be positive")


@dataclass(frozen=True)
class LteGrid:
    """Downlink grid: 100 blocks of 180 kHz occupy a 20 MHz carrier."""

    center_freq_hz: int = DEFAULT_CENTER_HZ
    n_rrb: int = 100
    rrb_bandwidth_hz: int = 180_000

    def __post_init__(self) -> None:
        _check_grid(self.center_freq_hz, self.n_rrb, self.rrb_bandwidth_hz)

    def span_hz(self) -> tuple[int, int]:
        half = self.n_rrb * self.rrb_bandwidth_hz // 2
        return self.center_freq_hz - half, self.center_freq_hz + half


@dataclass(frozen=True)
class WifiGrid:
    """OFDM grid: 64 subcarriers of 312.5 kHz across the same 20 MHz.

    ``excluded`` lists subcarrier indices (guard or DC bins) to skip when
    building cross-grid maps; by default every bin participates.
    """

    center_freq_hz: int = DEFAULT_CENTER_HZ
    n_sc: int = 64
    sc_bandwidth_hz: int = 312_500
    excluded: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        _check_grid(self.center_freq_hz, self.n_sc, self.sc_bandwidth_hz)
        for s in self.excluded:
            if not 0 <= s < self.n_sc:
                raise ValueError(f"excluded subcarrier {s} out of range")
        if len(set(self.excluded)) >= self.n_sc:
            raise ValueError("cannot exclude every subcarrier")

    def span_hz(self) -> tuple[int, int]:
        half = self.n_sc * self.sc_bandwidth_hz // 2
        return self.center_freq_hz - half, self.center_freq_hz + half


def rrb_center_freq(grid: LteGrid, r: int) -> int:
    """Center frequency of resource block ``r`` in integer hertz."""
    if not 0 <= r < grid.n_rrb:
        raise IndexError(f"resource block {r} out of range 0..{grid.n_rrb - 1}")
    return grid.center_freq_hz + (2 * r - (grid.n_rrb - 1)) * grid.rrb_bandwidth_hz // 2


def sc_center_freq(grid: WifiGrid, s: int) -> int:
    """Center frequency of subcarrier ``s`` in integer hertz."""
    if not 0 <= s < grid.n_sc:
        raise IndexError(f"subcarrier {s} out of range 0..{grid.n_sc - 1}")
    return grid.center_freq_hz + (2 * s - (grid.n_sc - 1)) * grid.sc_bandwidth_hz // 2


@dataclass(frozen=True)
class RbScMap:
    """Per resource block, the index of the nearest usable subcarrier."""

    rb_to_sc: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b < a for a, b in zip(self.rb_to_sc, self.rb_to_sc[1:])):
            raise ValueError("rb_to_sc must be monotone non-decreasing")

    def __getitem__(self, r: int) -> int:
        return self.rb_to_sc[r]

    def __len__(self) -> int:
        return len(self.rb_to_sc)


def _require_overlap(lte: LteGrid, wifi: WifiGrid) -> None:
    lo_a, hi_a = lte.span_hz()
    lo_b, hi_b = wifi.span_hz()
    if hi_a <= lo_b or hi_b <= lo_a:
        raise ValueError("grids do not overlap in frequency")


def build_rb_sc_map(lte: LteGrid, wifi: WifiGrid) -> RbScMap:
    """Map every resource block to its nearest subcarrier center.

    Distance ties break toward the lower subcarrier index.  Excluded
    subcarriers never appear in the map.
    """
    _require_overlap(lte, wifi)
    usable = [s for s in range(wifi.n_sc) if s not in set(wifi.excluded)]
    out = []
    for r in range(lte.n_rrb):
        fr = rrb_center_freq(lte, r)
        best_s = usable[0]
        best_d = abs(fr - sc_center_freq(wifi, best_s))
        for s in usable[1:]:
            d = abs(fr - sc_center_freq(wifi, s))
            if d < best_d:
                best_s, best_d = s, d
        out.append(best_s)
    return RbScMap(tuple(out))


def nearest_rrb(lte: LteGrid, freq_hz: int) -> int:
    """Index of the resource block whose center is nearest ``freq_hz``.

    Ties break toward the lower index.
    """
    best_r, best_d = 0, abs(freq_hz - rrb_center_freq(lte, 0))
    for r in range(1, lte.n_rrb):
        d = abs(freq_hz - rrb_center_freq(lte, r))
        if d < best_d:
            best_r, best_d = r, d
    return best_r


def build_sc_rb_map(lte: LteGrid, wifi: WifiGrid) -> tuple[int, ...]:
    """Inverse lookup used on the receive side: nearest block per subcarrier."""
    _require_overlap(lte, wifi)
    return tuple(nearest_rrb(lte, sc_center_freq(wifi, s)) for s in range(wifi.n_sc))
