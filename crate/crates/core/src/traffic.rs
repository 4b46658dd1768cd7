//! Application-layer XR traffic generation.
//!
//! Builds the stochastic packet processes for the XR flows: downlink and
//! uplink video with truncated-Gaussian frame sizes and arrival jitter,
//! constant-rate uplink motion/control updates, and the optional aggregated
//! audio+data stream. One generated packet stands for one application frame
//! (all IP packets of the frame together), which is the unit the
//! satisfied-UE metric counts.

use crate::error::{Result, SimError};
use crate::stochastics::{
    sample_trunc_gauss_with, RngStream, StreamPurpose, TruncGaussSpec, Truncation,
};
use serde::{Deserialize, Serialize};

/// Link direction of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Dl,
    Ul,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Dl => write!(f, "DL"),
            Direction::Ul => write!(f, "UL"),
        }
    }
}

/// XR service category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Service {
    Vr,
    Ar,
    Cg,
}

impl std::fmt::Display for Service {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Service::Vr => write!(f, "VR"),
            Service::Ar => write!(f, "AR"),
            Service::Cg => write!(f, "CG"),
        }
    }
}

/// Stream payload semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Video,
    MotionControl,
    AudioData,
}

/// Packet size law of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SizeSpec {
    /// Truncated-Gaussian frame sizes (video).
    TruncGauss(TruncGaussSpec),
    /// Fixed size in bytes (motion/control, audio+data).
    Constant(f64),
}

impl SizeSpec {
    pub fn mean_bytes(&self) -> f64 {
        match self {
            SizeSpec::TruncGauss(s) => s.mean,
            SizeSpec::Constant(b) => *b,
        }
    }
}

/// Default arrival jitter: truncated Gaussian, zero mean, 2 ms std, +/-4 ms.
pub fn default_jitter() -> TruncGaussSpec {
    TruncGaussSpec {
        mean: 0.0,
        std: 2.0,
        min: -4.0,
        max: 4.0,
    }
}

/// Wider jitter window variant (+/-5 ms), selectable by config.
pub fn wide_jitter() -> TruncGaussSpec {
    TruncGaussSpec {
        mean: 0.0,
        std: 2.0,
        min: -5.0,
        max: 5.0,
    }
}

/// One application-layer flow of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub kind: StreamKind,
    pub direction: Direction,
    /// Packets per second (nominal frame rate).
    pub fps: f64,
    /// Average offered rate in bit/s.
    pub avg_rate_bps: f64,
    /// Arrival jitter; `None` means exactly periodic arrivals.
    pub jitter: Option<TruncGaussSpec>,
    /// Packet delay budget in ms.
    pub pdb_ms: f64,
    pub size: SizeSpec,
    /// Set on the two halves produced by a multi-stream split.
    pub multi_stream_part: bool,
    /// Out-of-bounds handling for jitter and size draws.
    #[serde(default)]
    pub truncation: Truncation,
}

impl StreamConfig {
    pub fn period_ms(&self) -> f64 {
        1000.0 / self.fps
    }

    pub fn validate(&self) -> Result<()> {
        if self.fps <= 0.0 {
            return Err(SimError::config(format!(
                "fps must be positive, got {}",
                self.fps
            )));
        }
        if self.avg_rate_bps <= 0.0 {
            return Err(SimError::config(format!(
                "average rate must be positive, got {}",
                self.avg_rate_bps
            )));
        }
        if self.pdb_ms <= 0.0 {
            return Err(SimError::config(format!(
                "PDB must be positive, got {}",
                self.pdb_ms
            )));
        }
        if let Some(j) = &self.jitter {
            j.validate()?;
        }
        if let SizeSpec::TruncGauss(s) = &self.size {
            s.validate()?;
        }
        if self.size.mean_bytes() <= 0.0 {
            return Err(SimError::config("packet size must be positive".to_string()));
        }
        Ok(())
    }
}

/// Frame-size spec for a video stream: mean = rate / (fps * 8) bytes,
/// std 10.5% of mean, bounds 50%..150% of mean.
pub fn video_size_spec(avg_rate_bps: f64, fps: f64) -> TruncGaussSpec {
    let mean = avg_rate_bps / (fps * 8.0);
    TruncGaussSpec {
        mean,
        std: 0.105 * mean,
        min: 0.5 * mean,
        max: 1.5 * mean,
    }
}

/// Frame rates the video model is defined for.
pub const SUPPORTED_VIDEO_FPS: [f64; 4] = [30.0, 60.0, 90.0, 120.0];

/// Delay budget in ms for a (service, direction) video stream.
fn video_pdb_ms(service: Service, direction: Direction) -> Result<f64> {
    match (service, direction) {
        (Service::Ar, Direction::Dl) | (Service::Vr, Direction::Dl) => Ok(10.0),
        (Service::Cg, Direction::Dl) => Ok(15.0),
        (Service::Ar, Direction::Ul) => Ok(30.0),
        (s, d) => Err(SimError::config(format!(
            "no video stream defined for {s} {d}"
        ))),
    }
}

/// Build a video stream for `(service, direction)` with the derived
/// truncated-Gaussian size spec and the matching delay budget.
///
/// DL video carries arrival jitter by default; UL video is periodic unless
/// a jitter spec is supplied afterwards.
pub fn build_video_stream(
    service: Service,
    direction: Direction,
    fps: f64,
    avg_rate_bps: f64,
) -> Result<StreamConfig> {
    if !SUPPORTED_VIDEO_FPS.contains(&fps) {
        return Err(SimError::config(format!(
            "unsupported video frame rate {fps}; expected one of {SUPPORTED_VIDEO_FPS:?}"
        )));
    }
    if avg_rate_bps <= 0.0 {
        return Err(SimError::config("video rate must be positive".to_string()));
    }
    let pdb_ms = video_pdb_ms(service, direction)?;
    let cfg = StreamConfig {
        kind: StreamKind::Video,
        direction,
        fps,
        avg_rate_bps,
        jitter: match direction {
            Direction::Dl => Some(default_jitter()),
            Direction::Ul => None,
        },
        pdb_ms,
        size: SizeSpec::TruncGauss(video_size_spec(avg_rate_bps, fps)),
        multi_stream_part: false,
        truncation: Truncation::Rejection,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Uplink pose/input updates: 100-byte packets at 250 packets/s, PDB 10 ms.
pub fn motion_control_stream() -> StreamConfig {
    StreamConfig {
        kind: StreamKind::MotionControl,
        direction: Direction::Ul,
        fps: 250.0,
        avg_rate_bps: 100.0 * 8.0 * 250.0,
        jitter: None,
        pdb_ms: 10.0,
        size: SizeSpec::Constant(100.0),
        multi_stream_part: false,
        truncation: Truncation::Rejection,
    }
}

/// Aggregated audio+data stream: constant packets at 100 packets/s, PDB 30 ms.
pub fn audio_data_stream(direction: Direction, avg_rate_bps: f64) -> Result<StreamConfig> {
    if avg_rate_bps <= 0.0 {
        return Err(SimError::config("audio rate must be positive".to_string()));
    }
    let cfg = StreamConfig {
        kind: StreamKind::AudioData,
        direction,
        fps: 100.0,
        avg_rate_bps,
        jitter: None,
        pdb_ms: 30.0,
        size: SizeSpec::Constant(avg_rate_bps / (100.0 * 8.0)),
        multi_stream_part: false,
        truncation: Truncation::Rejection,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Split a single-stream video flow into its two-stream form (one stream
/// per eye). Each half carries half the rate, so the per-packet mean size
/// halves while the combined packet arrival rate across the pair doubles;
/// the pair together offers exactly the original average rate.
pub fn split_multi_stream(cfg: &StreamConfig) -> Result<(StreamConfig, StreamConfig)> {
    split_multi_stream_with(cfg, false)
}

/// Split with an explicit opt-in for re-splitting an already split stream.
pub fn split_multi_stream_with(
    cfg: &StreamConfig,
    allow_resplit: bool,
) -> Result<(StreamConfig, StreamConfig)> {
    if cfg.kind != StreamKind::Video {
        return Err(SimError::config(format!(
            "multi-stream split applies to video only, got {:?}",
            cfg.kind
        )));
    }
    if cfg.multi_stream_part && !allow_resplit {
        return Err(SimError::config(
            "stream is already a multi-stream part; re-split not allowed".to_string(),
        ));
    }
    let half_rate = cfg.avg_rate_bps / 2.0;
    let part = StreamConfig {
        kind: StreamKind::Video,
        direction: cfg.direction,
        fps: cfg.fps,
        avg_rate_bps: half_rate,
        jitter: cfg.jitter,
        pdb_ms: cfg.pdb_ms,
        size: SizeSpec::TruncGauss(video_size_spec(half_rate, cfg.fps)),
        multi_stream_part: true,
        truncation: cfg.truncation,
    };
    Ok((part.clone(), part))
}

/// One application frame at the radio ingress.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Packet {
    /// Sequence number within the stream.
    pub packet_id: u64,
    pub ue_id: u32,
    pub stream_idx: u32,
    pub size_bytes: u32,
    pub arrival_ms: f64,
    /// `arrival_ms + pdb_ms` of the stream.
    pub deadline_ms: f64,
    /// Set by the MAC when the last byte is delivered.
    pub completion_ms: Option<f64>,
}

/// Generate the arrival sequence of one stream over `[0, horizon_ms)`.
///
/// Packet `k` nominally arrives at `offset_ms + k * 1000/fps`; jittered
/// streams add an independent truncated-Gaussian displacement per packet.
/// Nominal instants are generated while they fall below the horizon, so a
/// jittered arrival may land slightly past it.
pub fn generate_arrivals(
    cfg: &StreamConfig,
    ue_id: u32,
    stream_idx: u32,
    rng: &mut RngStream,
    horizon_ms: f64,
    offset_ms: f64,
) -> Result<Vec<Packet>> {
    cfg.validate()?;
    if horizon_ms < 0.0 {
        return Err(SimError::config("horizon must be non-negative".to_string()));
    }
    let period = cfg.period_ms();
    let mut packets = Vec::with_capacity(((horizon_ms / period) as usize).saturating_add(1));
    let mut k = 0u64;
    loop {
        let nominal = offset_ms + k as f64 * period;
        if nominal >= horizon_ms {
            break;
        }
        let arrival = match &cfg.jitter {
            Some(spec) => nominal + sample_trunc_gauss_with(rng, spec, cfg.truncation),
            None => nominal,
        };
        let size = match &cfg.size {
            SizeSpec::TruncGauss(spec) => sample_trunc_gauss_with(rng, spec, cfg.truncation)
                .round()
                .max(1.0) as u32,
            SizeSpec::Constant(b) => b.round().max(1.0) as u32,
        };
        packets.push(Packet {
            packet_id: k,
            ue_id,
            stream_idx,
            size_bytes: size,
            arrival_ms: arrival,
            deadline_ms: arrival + cfg.pdb_ms,
            completion_ms: None,
        });
        k += 1;
    }
    Ok(packets)
}

/// Composition of the flows one UE runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTemplate {
    pub service: Service,
    pub streams: Vec<StreamConfig>,
    pub multi_stream_video: bool,
    pub include_audio: bool,
}

/// Knobs for building a session template.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionOptions {
    pub fps: f64,
    pub dl_video_rate_bps: f64,
    /// AR only.
    pub ul_video_rate_bps: f64,
    pub multi_stream_video: bool,
    pub include_audio: bool,
    /// Adds the AR uplink audio+data flow on top of the downlink one.
    pub include_ul_audio: bool,
    pub audio_rate_bps: f64,
    /// Table default keeps UL video periodic; set to add DL-style jitter.
    pub ul_video_jitter: bool,
    /// Use the wider +/-5 ms jitter window on jittered streams.
    pub wide_jitter_window: bool,
    /// Out-of-bounds handling for all truncated-Gaussian draws.
    pub truncation: Truncation,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            fps: 60.0,
            dl_video_rate_bps: 30e6,
            ul_video_rate_bps: 10e6,
            multi_stream_video: false,
            include_audio: false,
            include_ul_audio: false,
            audio_rate_bps: 0.756e6,
            ul_video_jitter: false,
            wide_jitter_window: false,
            truncation: Truncation::Rejection,
        }
    }
}

impl SessionTemplate {
    /// Baseline session for a service: DL video plus UL motion/control,
    /// a UL video stream for AR, and optional audio+data.
    pub fn build(service: Service, opts: &SessionOptions) -> Result<Self> {
        let jitter_spec = if opts.wide_jitter_window {
            wide_jitter()
        } else {
            default_jitter()
        };
        let mut dl_video =
            build_video_stream(service, Direction::Dl, opts.fps, opts.dl_video_rate_bps)?;
        dl_video.jitter = Some(jitter_spec);

        let mut streams = Vec::new();
        if opts.multi_stream_video {
            let (a, b) = split_multi_stream(&dl_video)?;
            streams.push(a);
            streams.push(b);
        } else {
            streams.push(dl_video);
        }
        streams.push(motion_control_stream());

        if service == Service::Ar {
            let mut ul_video =
                build_video_stream(service, Direction::Ul, opts.fps, opts.ul_video_rate_bps)?;
            if opts.ul_video_jitter {
                ul_video.jitter = Some(jitter_spec);
            }
            streams.push(ul_video);
        }

        if opts.include_audio {
            streams.push(audio_data_stream(Direction::Dl, opts.audio_rate_bps)?);
            if opts.include_ul_audio && service == Service::Ar {
                streams.push(audio_data_stream(Direction::Ul, opts.audio_rate_bps)?);
            }
        }
        for s in &mut streams {
            s.truncation = opts.truncation;
        }

        Ok(Self {
            service,
            streams,
            multi_stream_video: opts.multi_stream_video,
            include_audio: opts.include_audio,
        })
    }
}

/// Arrival sequence of one stream of one UE.
#[derive(Debug, Clone)]
pub struct StreamArrivals {
    pub config: StreamConfig,
    pub packets: Vec<Packet>,
}

/// Generate all stream arrival sequences for one UE session.
///
/// Each stream draws from its own `(seed, ue, stream)` random stream and
/// starts at a uniform random phase within one frame period, so frame
/// arrivals are de-synchronized across UEs and flows. The result is a pure
/// function of `(template, ue_id, seed, horizon)` - simulations with more
/// UEs see bit-identical traffic for the UEs they share.
pub fn generate_session(
    template: &SessionTemplate,
    ue_id: u32,
    seed: u64,
    horizon_ms: f64,
) -> Result<Vec<StreamArrivals>> {
    let mut out = Vec::with_capacity(template.streams.len());
    for (idx, cfg) in template.streams.iter().enumerate() {
        let mut rng = RngStream::derive(seed, StreamPurpose::Traffic, &[ue_id as u64, idx as u64]);
        let offset = rng.uniform_range(0.0, cfg.period_ms());
        let packets = generate_arrivals(cfg, ue_id, idx as u32, &mut rng, horizon_ms, offset)?;
        out.push(StreamArrivals {
            config: cfg.clone(),
            packets,
        });
    }
    Ok(out)
}

/// Empirical statistics of a generated stream, for the traffic validator.
#[derive(Debug, Clone, Serialize)]
pub struct StreamStats {
    pub n: usize,
    pub empirical_mean_bytes: f64,
    pub empirical_std_bytes: f64,
    pub empirical_rate_bps: f64,
    pub min_bytes: u32,
    pub max_bytes: u32,
    pub analytical_mean_bytes: f64,
    pub analytical_rate_bps: f64,
    pub size_bounds_ok: bool,
    pub mean_ok: bool,
    pub rate_ok: bool,
}

impl StreamStats {
    pub fn pass(&self) -> bool {
        self.size_bounds_ok && self.mean_ok && self.rate_ok
    }
}

/// Generate `n_packets` from `cfg` and compare against the analytical model.
pub fn stream_stats(cfg: &StreamConfig, seed: u64, n_packets: usize) -> Result<StreamStats> {
    let horizon = n_packets as f64 * cfg.period_ms();
    let mut rng = RngStream::derive(seed, StreamPurpose::Traffic, &[0, 0]);
    let packets = generate_arrivals(cfg, 0, 0, &mut rng, horizon, 0.0)?;
    let n = packets.len();
    if n == 0 {
        return Err(SimError::run("no packets generated".to_string()));
    }
    let total_bytes: u64 = packets.iter().map(|p| p.size_bytes as u64).sum();
    let mean = total_bytes as f64 / n as f64;
    let var = packets
        .iter()
        .map(|p| (p.size_bytes as f64 - mean).powi(2))
        .sum::<f64>()
        / n as f64;
    let rate = total_bytes as f64 * 8.0 / (horizon / 1000.0);
    let analytical_mean = cfg.size.mean_bytes();
    let (lo, hi) = match &cfg.size {
        SizeSpec::TruncGauss(s) => (s.min, s.max),
        SizeSpec::Constant(b) => (*b, *b),
    };
    let min_bytes = packets.iter().map(|p| p.size_bytes).min().unwrap();
    let max_bytes = packets.iter().map(|p| p.size_bytes).max().unwrap();
    Ok(StreamStats {
        n,
        empirical_mean_bytes: mean,
        empirical_std_bytes: var.sqrt(),
        empirical_rate_bps: rate,
        min_bytes,
        max_bytes,
        analytical_mean_bytes: analytical_mean,
        analytical_rate_bps: cfg.avg_rate_bps,
        // Half-byte slack: sizes are rounded to whole bytes after sampling.
        size_bounds_ok: min_bytes as f64 >= lo - 0.5 && max_bytes as f64 <= hi + 0.5,
        mean_ok: (mean - analytical_mean).abs() <= 0.01 * analytical_mean,
        rate_ok: (rate - cfg.avg_rate_bps).abs() <= 0.01 * cfg.avg_rate_bps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vr_dl_video_matches_table_values() {
        let cfg = build_video_stream(Service::Vr, Direction::Dl, 60.0, 30e6).unwrap();
        match cfg.size {
            SizeSpec::TruncGauss(s) => {
                assert_eq!(s.mean, 62_500.0);
                assert_eq!(s.std, 6_562.5);
                assert_eq!(s.min, 31_250.0);
                assert_eq!(s.max, 93_750.0);
            }
            _ => panic!("video must use truncated-Gaussian sizes"),
        }
        assert_eq!(cfg.pdb_ms, 10.0);
        assert!(cfg.jitter.is_some());
    }

    #[test]
    fn cg_dl_video_has_relaxed_pdb() {
        let cfg = build_video_stream(Service::Cg, Direction::Dl, 60.0, 30e6).unwrap();
        assert_eq!(cfg.size.mean_bytes(), 62_500.0);
        assert_eq!(cfg.pdb_ms, 15.0);
    }

    #[test]
    fn ar_ul_video_mean_and_pdb() {
        let cfg = build_video_stream(Service::Ar, Direction::Ul, 60.0, 10e6).unwrap();
        let mean = cfg.size.mean_bytes();
        assert!((mean - 20_833.333_333).abs() < 1e-6);
        assert_eq!(cfg.pdb_ms, 30.0);
        assert!(cfg.jitter.is_none(), "UL video is periodic by default");
    }

    #[test]
    fn unsupported_video_combinations_rejected() {
        assert!(build_video_stream(Service::Vr, Direction::Ul, 60.0, 10e6).is_err());
        assert!(build_video_stream(Service::Cg, Direction::Ul, 60.0, 10e6).is_err());
        assert!(build_video_stream(Service::Vr, Direction::Dl, 59.0, 30e6).is_err());
    }

    #[test]
    fn split_halves_mean_and_preserves_combined_rate() {
        let cfg = build_video_stream(Service::Vr, Direction::Dl, 60.0, 30e6).unwrap();
        let (a, b) = split_multi_stream(&cfg).unwrap();
        assert_eq!(a.size.mean_bytes(), 31_250.0);
        assert_eq!(b.size.mean_bytes(), 31_250.0);
        assert_eq!(a.avg_rate_bps + b.avg_rate_bps, 30e6);
        // Pairwise arrival rate doubles: two 60 fps flows.
        assert_eq!(a.fps + b.fps, 2.0 * cfg.fps);
        assert!(a.multi_stream_part && b.multi_stream_part);
    }

    #[test]
    fn resplit_rejected_unless_allowed() {
        let cfg = build_video_stream(Service::Vr, Direction::Dl, 60.0, 30e6).unwrap();
        let (a, _) = split_multi_stream(&cfg).unwrap();
        assert!(split_multi_stream(&a).is_err());
        assert!(split_multi_stream_with(&a, true).is_ok());
    }

    #[test]
    fn split_rejects_non_video() {
        assert!(split_multi_stream(&motion_control_stream()).is_err());
    }

    #[test]
    fn motion_over_100ms_gives_25_exact_packets() {
        let cfg = motion_control_stream();
        let mut rng = RngStream::new(1, 0);
        let packets = generate_arrivals(&cfg, 0, 0, &mut rng, 100.0, 0.0).unwrap();
        assert_eq!(packets.len(), 25);
        for (k, p) in packets.iter().enumerate() {
            assert_eq!(p.size_bytes, 100);
            assert_eq!(p.arrival_ms, k as f64 * 4.0);
            assert_eq!(p.deadline_ms, p.arrival_ms + 10.0);
        }
    }

    #[test]
    fn audio_packets_are_945_bytes_every_10ms() {
        let cfg = audio_data_stream(Direction::Dl, 0.756e6).unwrap();
        let mut rng = RngStream::new(1, 0);
        let packets = generate_arrivals(&cfg, 0, 0, &mut rng, 50.0, 0.0).unwrap();
        assert_eq!(packets.len(), 5);
        for (k, p) in packets.iter().enumerate() {
            assert_eq!(p.size_bytes, 945);
            assert_eq!(p.arrival_ms, k as f64 * 10.0);
        }
    }

    #[test]
    fn jittered_video_gaps_bounded_and_positive() {
        let cfg = build_video_stream(Service::Vr, Direction::Dl, 60.0, 30e6).unwrap();
        let mut rng = RngStream::new(7, 0);
        let packets = generate_arrivals(&cfg, 0, 0, &mut rng, 60_000.0, 0.0).unwrap();
        let period = 1000.0 / 60.0;
        for w in packets.windows(2) {
            let gap = w[1].arrival_ms - w[0].arrival_ms;
            assert!(gap > 0.0, "arrivals must stay strictly increasing");
            assert!(gap >= period - 8.0 - 1e-9 && gap <= period + 8.0 + 1e-9);
        }
        for p in &packets {
            let nominal = p.packet_id as f64 * period;
            assert!(
                (p.arrival_ms - nominal).abs() <= 4.0 + 1e-9,
                "jitter escaped +/-4 ms"
            );
        }
    }

    #[test]
    fn vr_template_has_two_streams() {
        let t = SessionTemplate::build(Service::Vr, &SessionOptions::default()).unwrap();
        assert_eq!(t.streams.len(), 2);
        assert_eq!(t.streams[0].kind, StreamKind::Video);
        assert_eq!(t.streams[0].direction, Direction::Dl);
        assert_eq!(t.streams[1].kind, StreamKind::MotionControl);
    }

    #[test]
    fn ar_template_with_audio_has_four_streams() {
        let opts = SessionOptions {
            include_audio: true,
            ..SessionOptions::default()
        };
        let t = SessionTemplate::build(Service::Ar, &opts).unwrap();
        assert_eq!(t.streams.len(), 4);
        let ul_video = t
            .streams
            .iter()
            .find(|s| s.kind == StreamKind::Video && s.direction == Direction::Ul)
            .expect("AR carries UL video");
        assert_eq!(ul_video.pdb_ms, 30.0);
    }

    #[test]
    fn empty_horizon_yields_empty_sequences() {
        let t = SessionTemplate::build(Service::Vr, &SessionOptions::default()).unwrap();
        let arrivals = generate_session(&t, 0, 1, 0.0).unwrap();
        assert!(arrivals.iter().all(|s| s.packets.is_empty()));
    }

    #[test]
    fn session_traffic_is_independent_of_other_ues() {
        let t = SessionTemplate::build(Service::Vr, &SessionOptions::default()).unwrap();
        let solo = generate_session(&t, 5, 42, 2000.0).unwrap();
        // Generate a crowd, then UE 5 again; draws must be untouched.
        for ue in 0..20 {
            let _ = generate_session(&t, ue, 42, 2000.0).unwrap();
        }
        let again = generate_session(&t, 5, 42, 2000.0).unwrap();
        for (a, b) in solo.iter().zip(again.iter()) {
            assert_eq!(a.packets, b.packets);
        }
    }

    #[test]
    fn deadline_law_holds() {
        let t = SessionTemplate::build(Service::Ar, &SessionOptions::default()).unwrap();
        for sa in generate_session(&t, 3, 9, 3000.0).unwrap() {
            for p in &sa.packets {
                assert_eq!(p.deadline_ms, p.arrival_ms + sa.config.pdb_ms);
            }
        }
    }

    #[test]
    fn video_rate_consistency_over_many_frames() {
        let cfg = build_video_stream(Service::Vr, Direction::Dl, 60.0, 45e6).unwrap();
        let stats = stream_stats(&cfg, 11, 20_000).unwrap();
        assert!(
            stats.rate_ok,
            "empirical rate {} vs 45e6",
            stats.empirical_rate_bps
        );
        assert!(stats.mean_ok);
        assert!(stats.size_bounds_ok);
    }

    proptest::proptest! {
        #[test]
        fn arrivals_strictly_increasing_for_supported_fps(
            fps_idx in 0usize..4,
            seed in 0u64..200,
        ) {
            let fps = SUPPORTED_VIDEO_FPS[fps_idx];
            let cfg = build_video_stream(Service::Vr, Direction::Dl, fps, 30e6).unwrap();
            let mut rng = RngStream::new(seed, 1);
            let packets = generate_arrivals(&cfg, 0, 0, &mut rng, 10_000.0, 0.0).unwrap();
            for w in packets.windows(2) {
                proptest::prop_assert!(w[1].arrival_ms > w[0].arrival_ms);
            }
        }

        #[test]
        fn generated_rate_tracks_config(rate_mbps in 5.0f64..60.0, seed in 0u64..50) {
            let cfg = build_video_stream(Service::Vr, Direction::Dl, 60.0, rate_mbps * 1e6).unwrap();
            let stats = stream_stats(&cfg, seed, 10_000).unwrap();
            proptest::prop_assert!(stats.rate_ok);
        }
    }
}
