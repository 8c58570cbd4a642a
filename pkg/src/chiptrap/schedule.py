"""Piecewise-linear voltage schedules and the transport/splitting protocols.

The transport ("motor") protocol moves a trap along the guide by two-phase
ramps between neighboring electrodes of alternating polarity; the splitter
ramps one center electrode down while charging the two flanking electrodes
of opposite polarity.
"""

import numpy as np


class ScheduleError(ValueError):
    pass


class VoltageSchedule:
    """Per-channel piecewise-linear voltage vs time.

    Evaluation clamps to the endpoint values outside [0, duration].  A
    discontinuous turn-on at t=0 is allowed only when flagged
    nonadiabatic_switch_on (the breakpoints themselves are always
    interpolated continuously).
    """

    def __init__(self, channels, duration, nonadiabatic_switch_on=False):
        self.channels = {}
        for name, bps in channels.items():
            arr = np.asarray(bps, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) == 0:
                raise ScheduleError(f"channel {name}: breakpoints must be a "
                                    "non-empty (n, 2) [time, volt] list")
            if len(arr) > 1 and not np.all(np.diff(arr[:, 0]) > 0):
                raise ScheduleError(f"channel {name}: breakpoint times must "
                                    "be strictly increasing")
            self.channels[name] = arr
        self.duration = float(duration)
        if self.duration < 0:
            raise ScheduleError("duration must be nonnegative")
        for name, arr in self.channels.items():
            if arr[-1, 0] > self.duration + 1e-15:
                raise ScheduleError(f"channel {name}: breakpoint beyond the "
                                    "schedule duration")
        self.nonadiabatic_switch_on = bool(nonadiabatic_switch_on)
        self._mirror_of = None

    def value(self, channel, t):
        arr = self.channels[channel]
        return float(np.interp(t, arr[:, 0], arr[:, 1]))

    def values(self, t):
        """channel -> voltage at time t (clamped)."""
        return {name: self.value(name, t) for name in self.channels}

    def segment_times(self):
        """Union of all breakpoint times, bracketed by 0 and duration."""
        ts = {0.0, self.duration}
        for arr in self.channels.values():
            ts.update(arr[:, 0].tolist())
        return np.array(sorted(t for t in ts if 0.0 <= t <= self.duration))

    def slope(self, channel, t0, t1):
        """Mean dV/dt of a channel over [t0, t1] (exact for PWL segments)."""
        if t1 <= t0:
            return 0.0
        return (self.value(channel, t1) - self.value(channel, t0)) / (t1 - t0)

    def reverse(self):
        """Time-mirrored schedule; reversing a reversed schedule returns the
        original object (exact involution)."""
        if self._mirror_of is not None:
            return self._mirror_of
        channels = {}
        for name, arr in self.channels.items():
            rev = np.column_stack([self.duration - arr[::-1, 0], arr[::-1, 1]])
            channels[name] = rev
        out = VoltageSchedule(channels, self.duration,
                              nonadiabatic_switch_on=False)
        out._mirror_of = self
        return out

    @staticmethod
    def constant(voltages, duration, nonadiabatic_switch_on=False):
        channels = {name: [[0.0, v]] for name, v in voltages.items()}
        return VoltageSchedule(channels, duration,
                               nonadiabatic_switch_on=nonadiabatic_switch_on)

    def to_dict(self):
        return {
            "duration": self.duration,
            "nonadiabatic_switch_on": self.nonadiabatic_switch_on,
            "channels": {name: arr.tolist()
                         for name, arr in self.channels.items()},
        }

    @staticmethod
    def from_dict(d):
        return VoltageSchedule(d["channels"], d["duration"],
                               d.get("nonadiabatic_switch_on", False))


def motor_schedule(v_hold, v_mid, step_time, hops, channels=None):
    """Two-phase alternating-polarity transport ramps.

    Each hop has two phases of step_time: first the source ramps
    +v_hold -> +v_mid while the target (opposite polarity) ramps
    0 -> -v_mid; then the source ramps to 0 while the target completes to
    -v_hold.  Polarity alternates hop to hop so neighboring electrodes on
    opposite sides of the wire always carry opposite signs.
    """
    if not (v_hold > v_mid > 0):
        raise ScheduleError("need v_hold > v_mid > 0")
    if hops < 1:
        raise ScheduleError("hops must be >= 1")
    if step_time <= 0:
        raise ScheduleError("step_time must be positive")
    if channels is None:
        channels = tuple(f"e{k + 2}" for k in range(hops + 1))
    if len(channels) != hops + 1:
        raise ScheduleError(f"need {hops + 1} channels for {hops} hops")
    bps = {name: [] for name in channels}
    for k in range(hops):
        sgn_s = 1.0 if k % 2 == 0 else -1.0
        sgn_t = -sgn_s
        t0 = 2 * k * step_time
        src, tgt = channels[k], channels[k + 1]
        if k == 0:
            bps[src].append((t0, sgn_s * v_hold))
        bps[src] += [(t0 + step_time, sgn_s * v_mid), (t0 + 2 * step_time, 0.0)]
        bps[tgt] += [(t0, 0.0), (t0 + step_time, sgn_t * v_mid),
                     (t0 + 2 * step_time, sgn_t * v_hold)]
    # the hop-k target's final breakpoint is the hop-(k+1) source's first;
    # drop the duplicate appended by the next hop
    chans = {}
    for name, lst in bps.items():
        seen = {}
        for t, v in lst:
            seen[t] = v
        chans[name] = sorted(seen.items())
    return VoltageSchedule(chans, 2 * hops * step_time)


def splitter_schedule(v_hold, v_split, ramp_time, center="e3",
                      flanks=("e2", "e4"), reverse=False):
    """Single trap to double well: the center electrode ramps to zero while
    both flanking electrodes (opposite side of the wire) charge to the
    opposite polarity.  reverse=True gives the recombination ramp."""
    if v_hold <= 0 or v_split <= 0:
        raise ScheduleError("voltages must be positive")
    if ramp_time <= 0:
        raise ScheduleError("ramp_time must be positive")
    channels = {center: [[0.0, v_hold], [ramp_time, 0.0]]}
    for name in flanks:
        channels[name] = [[0.0, 0.0], [ramp_time, -v_split]]
    sched = VoltageSchedule(channels, ramp_time)
    return sched.reverse() if reverse else sched
