use std::time::Instant;

/// Time source for a budgeted run.
pub trait Clock {
    /// Seconds since the clock started.
    fn elapsed(&self) -> f64;

    /// Called after every local-search invocation.
    fn charge_local_search(&mut self) {}
}

/// Monotonic wall clock.
#[derive(Debug, Clone)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Counts local-search invocations; each one advances time by a fixed tick.
/// Runs under this clock are bit-reproducible for a fixed seed.
#[derive(Debug, Clone)]
pub struct VirtualClock {
    tick: f64,
    invocations: u64,
}

impl VirtualClock {
    pub const DEFAULT_TICK: f64 = 0.01;

    pub fn new(tick: f64) -> Self {
        assert!(tick > 0.0, "tick must be positive");
        VirtualClock { tick, invocations: 0 }
    }

    pub fn invocations(&self) -> u64 {
        self.invocations
    }

    pub fn tick(&self) -> f64 {
        self.tick
    }
}

impl Default for VirtualClock {
    fn default() -> Self {
        VirtualClock::new(Self::DEFAULT_TICK)
    }
}

impl Clock for VirtualClock {
    fn elapsed(&self) -> f64 {
        self.invocations as f64 * self.tick
    }

    fn charge_local_search(&mut self) {
        self.invocations += 1;
    }
}

impl<C: Clock + ?Sized> Clock for &mut C {
    fn elapsed(&self) -> f64 {
        (**self).elapsed()
    }

    fn charge_local_search(&mut self) {
        (**self).charge_local_search()
    }
}
