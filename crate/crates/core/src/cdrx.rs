//! Connected-mode DRX: the active/sleep state machine that gates
//! scheduling eligibility, the per-UE relative power ledger, and the
//! power-saving-gain metric.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// DRX timer configuration. `enabled = false` is the Always-ON reference
/// scheme where the UE monitors control channels in every slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrxConfig {
    pub enabled: bool,
    pub long_cycle_ms: f64,
    pub on_duration_ms: f64,
    pub inactivity_timer_ms: f64,
}

impl DrxConfig {
    pub fn always_on() -> Self {
        Self {
            enabled: false,
            long_cycle_ms: 0.0,
            on_duration_ms: 0.0,
            inactivity_timer_ms: 0.0,
        }
    }

    pub fn new(long_cycle_ms: f64, on_duration_ms: f64, inactivity_timer_ms: f64) -> Result<Self> {
        let cfg = Self {
            enabled: true,
            long_cycle_ms,
            on_duration_ms,
            inactivity_timer_ms,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// (cycle 4 ms, on-duration 2 ms, inactivity 2 ms)
    pub fn cdrx1() -> Self {
        Self::new(4.0, 2.0, 2.0).unwrap()
    }

    /// (cycle 10 ms, on-duration 5 ms, inactivity 5 ms)
    pub fn cdrx3() -> Self {
        Self::new(10.0, 5.0, 5.0).unwrap()
    }

    /// (cycle 10 ms, on-duration 8 ms, inactivity 2 ms)
    pub fn cdrx4() -> Self {
        Self::new(10.0, 8.0, 2.0).unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if self.long_cycle_ms <= 0.0
            || self.on_duration_ms <= 0.0
            || self.inactivity_timer_ms <= 0.0
        {
            return Err(SimError::config(format!(
                "DRX timers must be positive when enabled: {self:?}"
            )));
        }
        if self.on_duration_ms > self.long_cycle_ms {
            return Err(SimError::config(format!(
                "on-duration {} exceeds long cycle {}",
                self.on_duration_ms, self.long_cycle_ms
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        if self.enabled {
            format!(
                "cdrx_{}_{}_{}",
                self.long_cycle_ms, self.on_duration_ms, self.inactivity_timer_ms
            )
        } else {
            "always_on".to_string()
        }
    }
}

/// Per-UE DRX runtime state.
#[derive(Debug, Clone)]
pub struct DrxState {
    /// Random phase of the cycle grid in [0, long_cycle).
    pub cycle_anchor_ms: f64,
    /// Running inactivity timer, if a grant armed one.
    pub inactivity_expiry_ms: Option<f64>,
}

impl DrxState {
    pub fn new(cycle_anchor_ms: f64) -> Self {
        Self {
            cycle_anchor_ms,
            inactivity_expiry_ms: None,
        }
    }

    /// Start of the DRX cycle containing `now`.
    fn cycle_start(&self, cfg: &DrxConfig, now_ms: f64) -> f64 {
        let rel = now_ms - self.cycle_anchor_ms;
        self.cycle_anchor_ms + (rel / cfg.long_cycle_ms).floor() * cfg.long_cycle_ms
    }

    /// Next instant the on-duration re-opens after `now`.
    pub fn next_wake_ms(&self, cfg: &DrxConfig, now_ms: f64) -> f64 {
        self.cycle_start(cfg, now_ms) + cfg.long_cycle_ms
    }
}

/// True iff the BS may schedule this UE at `now`: inside the on-duration
/// window of the current cycle, or inside a running inactivity timer.
/// Always true for the Always-ON scheme.
pub fn drx_is_eligible(cfg: &DrxConfig, state: &DrxState, now_ms: f64) -> bool {
    if !cfg.enabled {
        return true;
    }
    let on_duration_expiry = state.cycle_start(cfg, now_ms) + cfg.on_duration_ms;
    if now_ms < on_duration_expiry {
        return true;
    }
    matches!(state.inactivity_expiry_ms, Some(e) if now_ms < e)
}

/// Register a grant: every new grant restarts the inactivity timer.
/// Granting a sleeping UE violates the scheduler contract.
pub fn drx_on_grant(cfg: &DrxConfig, state: &mut DrxState, now_ms: f64) {
    if !cfg.enabled {
        return;
    }
    assert!(
        drx_is_eligible(cfg, state, now_ms),
        "grant issued to DRX-sleeping UE at t={now_ms}"
    );
    state.inactivity_expiry_ms = Some(now_ms + cfg.inactivity_timer_ms);
}

/// UE activity state of one slot for power attribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerState {
    PdcchOnly,
    PdschRx,
    PuschTx,
    LightSleep,
    DeepSleep,
}

pub const POWER_STATES: [PowerState; 5] = [
    PowerState::PdcchOnly,
    PowerState::PdschRx,
    PowerState::PuschTx,
    PowerState::LightSleep,
    PowerState::DeepSleep,
];

impl PowerState {
    pub fn name(&self) -> &'static str {
        match self {
            PowerState::PdcchOnly => "pdcch_only",
            PowerState::PdschRx => "pdsch_rx",
            PowerState::PuschTx => "pusch_tx",
            PowerState::LightSleep => "light_sleep",
            PowerState::DeepSleep => "deep_sleep",
        }
    }

    fn index(&self) -> usize {
        match self {
            PowerState::PdcchOnly => 0,
            PowerState::PdschRx => 1,
            PowerState::PuschTx => 2,
            PowerState::LightSleep => 3,
            PowerState::DeepSleep => 4,
        }
    }
}

/// Relative per-slot power of each state. These magnitudes are a standard
/// relative power model, not measured values; every power check downstream
/// is ratio- or direction-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub pdcch_only: f64,
    pub pdsch_rx: f64,
    pub pusch_tx: f64,
    pub light_sleep: f64,
    pub deep_sleep: f64,
    /// Sleep gaps at least this long count as deep sleep.
    pub deep_sleep_threshold_ms: f64,
}

impl Default for PowerTable {
    fn default() -> Self {
        Self {
            pdcch_only: 100.0,
            pdsch_rx: 300.0,
            pusch_tx: 250.0,
            light_sleep: 20.0,
            deep_sleep: 1.0,
            deep_sleep_threshold_ms: 20.0,
        }
    }
}

impl PowerTable {
    pub fn units(&self, state: PowerState) -> f64 {
        match state {
            PowerState::PdcchOnly => self.pdcch_only,
            PowerState::PdschRx => self.pdsch_rx,
            PowerState::PuschTx => self.pusch_tx,
            PowerState::LightSleep => self.light_sleep,
            PowerState::DeepSleep => self.deep_sleep,
        }
    }
}

/// Resolve the power state of one slot.
///
/// An active UE receiving a DL grant spends the slot in PDSCH reception, a
/// granted UL slot in PUSCH transmission, an idle active slot monitoring
/// PDCCH. A sleeping slot is light or deep sleep depending on the length
/// of the whole sleep gap it belongs to.
pub fn attribute_slot_power(
    active: bool,
    dl_granted: bool,
    ul_granted: bool,
    sleep_gap_ms: f64,
    table: &PowerTable,
) -> PowerState {
    if active {
        if dl_granted {
            PowerState::PdschRx
        } else if ul_granted {
            PowerState::PuschTx
        } else {
            PowerState::PdcchOnly
        }
    } else if sleep_gap_ms >= table.deep_sleep_threshold_ms {
        PowerState::DeepSleep
    } else {
        PowerState::LightSleep
    }
}

/// Accumulated per-state slot counts of one UE. Every simulated slot is
/// attributed to exactly one state.
#[derive(Debug, Clone, Default)]
pub struct PowerLedger {
    counts: [u64; 5],
}

impl PowerLedger {
    pub fn record(&mut self, state: PowerState) {
        self.counts[state.index()] += 1;
    }

    pub fn slots_in(&self, state: PowerState) -> u64 {
        self.counts[state.index()]
    }

    pub fn total_slots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn slots_active(&self) -> u64 {
        self.counts[0] + self.counts[1] + self.counts[2]
    }

    pub fn slots_asleep(&self) -> u64 {
        self.counts[3] + self.counts[4]
    }

    pub fn total_units(&self, table: &PowerTable) -> f64 {
        POWER_STATES
            .iter()
            .map(|s| self.slots_in(*s) as f64 * table.units(*s))
            .sum()
    }

    pub fn avg_units_per_slot(&self, table: &PowerTable) -> f64 {
        let n = self.total_slots();
        if n == 0 {
            0.0
        } else {
            self.total_units(table) / n as f64
        }
    }
}

/// Power saving gain in percent: `(1 - scheme/baseline) * 100`.
/// The raw ratio `scheme/baseline` is `1 - gain/100`.
pub fn power_saving_gain(avg_scheme: f64, avg_always_on: f64) -> Result<f64> {
    if avg_always_on <= 0.0 {
        return Err(SimError::run(format!(
            "power-saving baseline must be positive, got {avg_always_on}"
        )));
    }
    Ok((1.0 - avg_scheme / avg_always_on) * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdrx1_eligibility_window() {
        let cfg = DrxConfig::cdrx1();
        let state = DrxState::new(0.0);
        assert!(
            drx_is_eligible(&cfg, &state, 1.0),
            "1 ms into cycle: on-duration"
        );
        assert!(
            !drx_is_eligible(&cfg, &state, 3.0),
            "3 ms: past on-duration, no timer"
        );
        assert!(drx_is_eligible(&cfg, &state, 4.5), "next cycle re-opens");
        assert!(
            !drx_is_eligible(&cfg, &state, 2.0),
            "on-duration end is exclusive"
        );
    }

    #[test]
    fn always_on_is_always_eligible() {
        let cfg = DrxConfig::always_on();
        let state = DrxState::new(0.0);
        for i in 0..100 {
            assert!(drx_is_eligible(&cfg, &state, i as f64 * 0.37));
        }
    }

    #[test]
    fn anchor_shifts_the_cycle_grid() {
        let cfg = DrxConfig::cdrx1();
        let state = DrxState::new(1.5);
        assert!(
            !drx_is_eligible(&cfg, &state, 1.0),
            "before anchored cycle opens"
        );
        assert!(drx_is_eligible(&cfg, &state, 2.0));
        assert!(!drx_is_eligible(&cfg, &state, 3.6));
    }

    #[test]
    fn grant_restarts_inactivity_timer() {
        let cfg = DrxConfig::cdrx1();
        let mut state = DrxState::new(0.0);
        drx_on_grant(&cfg, &mut state, 1.9);
        assert!(
            drx_is_eligible(&cfg, &state, 3.5),
            "inactivity keeps UE awake"
        );
        assert!(!drx_is_eligible(&cfg, &state, 3.95));

        // Two grants 1 ms apart: window extends to second grant + 2 ms.
        let mut state = DrxState::new(0.0);
        drx_on_grant(&cfg, &mut state, 0.5);
        drx_on_grant(&cfg, &mut state, 1.5);
        assert!(drx_is_eligible(&cfg, &state, 3.4));
        assert!(!drx_is_eligible(&cfg, &state, 3.55));
    }

    #[test]
    fn cdrx4_grant_near_on_duration_end() {
        let cfg = DrxConfig::cdrx4();
        let mut state = DrxState::new(0.0);
        drx_on_grant(&cfg, &mut state, 7.9);
        assert!(drx_is_eligible(&cfg, &state, 9.85), "active until 9.9");
        assert!(!drx_is_eligible(&cfg, &state, 9.95));
    }

    #[test]
    #[should_panic(expected = "grant issued to DRX-sleeping UE")]
    fn grant_to_sleeping_ue_asserts() {
        let cfg = DrxConfig::cdrx1();
        let mut state = DrxState::new(0.0);
        drx_on_grant(&cfg, &mut state, 3.0);
    }

    #[test]
    fn next_wake_is_next_cycle_start() {
        let cfg = DrxConfig::cdrx3();
        let state = DrxState::new(2.0);
        assert_eq!(state.next_wake_ms(&cfg, 7.5), 12.0);
        assert_eq!(state.next_wake_ms(&cfg, 12.5), 22.0);
    }

    #[test]
    fn power_attribution_rules() {
        let t = PowerTable::default();
        assert_eq!(
            attribute_slot_power(true, true, false, 0.0, &t),
            PowerState::PdschRx
        );
        assert_eq!(
            attribute_slot_power(true, false, true, 0.0, &t),
            PowerState::PuschTx
        );
        assert_eq!(
            attribute_slot_power(true, false, false, 0.0, &t),
            PowerState::PdcchOnly
        );
        assert_eq!(
            attribute_slot_power(false, false, false, 5.0, &t),
            PowerState::LightSleep
        );
        assert_eq!(
            attribute_slot_power(false, false, false, 25.0, &t),
            PowerState::DeepSleep
        );
    }

    #[test]
    fn hand_built_20_slot_ledger() {
        // 8 pdcch, 5 pdsch, 2 pusch, 4 light, 1 deep:
        // 800 + 1500 + 500 + 80 + 1 = 2881 units over 20 slots.
        let t = PowerTable::default();
        let mut ledger = PowerLedger::default();
        for _ in 0..8 {
            ledger.record(PowerState::PdcchOnly);
        }
        for _ in 0..5 {
            ledger.record(PowerState::PdschRx);
        }
        for _ in 0..2 {
            ledger.record(PowerState::PuschTx);
        }
        for _ in 0..4 {
            ledger.record(PowerState::LightSleep);
        }
        ledger.record(PowerState::DeepSleep);
        assert_eq!(ledger.total_slots(), 20);
        assert_eq!(ledger.total_units(&t), 2881.0);
        assert!((ledger.avg_units_per_slot(&t) - 144.05).abs() < 1e-12);
    }

    #[test]
    fn gain_arithmetic_and_errors() {
        assert_eq!(power_saving_gain(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(power_saving_gain(50.0, 100.0).unwrap(), 50.0);
        assert!(power_saving_gain(50.0, 0.0).is_err());
    }

    #[test]
    fn invalid_drx_configs_rejected() {
        assert!(
            DrxConfig::new(4.0, 5.0, 2.0).is_err(),
            "on-duration > cycle"
        );
        assert!(DrxConfig::new(0.0, 0.0, 0.0).is_err());
        assert!(DrxConfig::new(-1.0, 1.0, 1.0).is_err());
    }
}
