use phasefield_core::Field;

/// Default hysteresis level for [`count_transitions`].
pub const TRANSITION_THRESHOLD: f64 = 0.9;

/// Reversals smaller than this are treated as noise by [`count_oscillations`].
pub const OSCILLATION_NOISE_FLOOR: f64 = 1e-3;

/// Number of passages from below `-threshold` to above `threshold` or back.
/// Excursions that cross zero without reaching the opposite level are not
/// counted, so overshoot inside a layer never registers as an extra jump.
pub fn count_transitions(u: &Field, threshold: f64) -> usize {
    let mut state = 0i8;
    let mut count = 0;
    for &v in u.values() {
        let side = if v >= threshold {
            1
        } else if v <= -threshold {
            -1
        } else {
            continue;
        };
        if state != 0 && side != state {
            count += 1;
        }
        state = side;
    }
    count
}

/// Number of direction reversals of `u` whose neighbouring extrema differ by
/// more than [`OSCILLATION_NOISE_FLOOR`].
pub fn count_oscillations(u: &Field) -> usize {
    let v = u.values();
    let Some(&first) = v.first() else { return 0 };
    let (mut lo, mut hi) = (first, first);
    // 0 until the first significant move, then the current direction
    let mut dir = 0i8;
    let mut reversals = 0;
    for &x in &v[1..] {
        match dir {
            0 => {
                lo = lo.min(x);
                hi = hi.max(x);
                if x - lo > OSCILLATION_NOISE_FLOOR {
                    dir = 1;
                    hi = x;
                } else if hi - x > OSCILLATION_NOISE_FLOOR {
                    dir = -1;
                    lo = x;
                }
            }
            1 => {
                if x > hi {
                    hi = x;
                } else if hi - x > OSCILLATION_NOISE_FLOOR {
                    reversals += 1;
                    dir = -1;
                    lo = x;
                }
            }
            _ => {
                if x < lo {
                    lo = x;
                } else if x - lo > OSCILLATION_NOISE_FLOOR {
                    reversals += 1;
                    dir = 1;
                    hi = x;
                }
            }
        }
    }
    reversals
}
