//! End-to-end signal chains shared by the experiment drivers.

use crate::ble::{
    build_with_address, detect_packet_start, gfsk_modulate, single_tone_adv_address, single_tone_payload, BleChannel,
    Detection, Polarity, MAX_ADV_PAYLOAD,
};
use crate::error::{Error, Result};
use crate::sigcore::{downconvert, IqBuffer};
use crate::ssbmod::{apply_waveform, FrequencyPlan};
use crate::wifi11b::{chips_to_backscatter, synthesize_packet, Rate, TxOptions, WifiPacket};
use crate::zigbee::{channel_freq, zigbee_synthesize, ZigbeePacket};

/// Simulation rate for the Wi-Fi uplink: four samples per 143 MHz state.
pub const UPLINK_RATE: f64 = 572e6;
/// Receiver rate after the Wi-Fi channel filter (four samples per chip).
pub const WIFI_RX_RATE: f64 = 44e6;
pub const ZIGBEE_SIM_RATE: f64 = 48e6;
pub const ZIGBEE_RX_RATE: f64 = 8e6;
const LEAD_S: f64 = 20e-6;
const RX_TAPS: usize = 255;

/// A single-tone advertising packet as the tag sees it.
#[derive(Debug, Clone)]
pub struct ToneAdvert {
    pub channel: BleChannel,
    pub polarity: Polarity,
    pub iq: IqBuffer,
    pub detection: Detection,
    /// Sample range that carries the pure tone.
    pub tone_span: (usize, usize),
}

/// Build, modulate and detect a single-tone advert. The advertiser address
/// and payload are both chosen to whiten to the tone bit, so the tone runs
/// from the end of the header to the start of the CRC.
pub fn tone_advert(channel: BleChannel, polarity: Polarity, sample_rate: f64) -> Result<ToneAdvert> {
    let payload = single_tone_payload(channel, polarity, MAX_ADV_PAYLOAD)?;
    let (pkt, bits) = build_with_address(channel, &payload, single_tone_adv_address(channel, polarity))?;
    let lead = (LEAD_S * sample_rate).round() as usize;
    let iq = gfsk_modulate(&bits, sample_rate)?.padded(lead, lead);
    let detection = detect_packet_start(&iq.envelope(), sample_rate, 0.5)?;
    let per_bit = (sample_rate / crate::ble::BLE_BIT_RATE).round() as usize;
    let tone_bits = (1 + 4 + 2) * 8..pkt.air_bits() - 24;
    // stay one bit clear of the Gaussian transitions at either end
    let tone_span = (lead + (tone_bits.start + 1) * per_bit, lead + (tone_bits.end - 1) * per_bit);
    Ok(ToneAdvert {
        channel,
        polarity,
        iq: IqBuffer { center_freq: channel.center_freq(), ..iq },
        detection,
        tone_span,
    })
}

impl ToneAdvert {
    pub fn tone_segment(&self) -> IqBuffer {
        self.iq.slice(self.tone_span.0, self.tone_span.1)
    }

    /// Seconds of tone left after the tag starts switching.
    pub fn usable_tone_s(&self) -> f64 {
        self.tone_span.1 as f64 / self.iq.sample_rate - self.detection.backscatter_start_s
    }
}

/// Reflected field and the receiver-channel baseband offset for a Wi-Fi
/// packet riding on `advert`.
#[derive(Debug, Clone)]
pub struct WifiUplink {
    pub packet: WifiPacket,
    pub reflected: IqBuffer,
    /// Wi-Fi channel centre relative to the BLE channel centre.
    pub rx_offset_hz: f64,
}

pub fn wifi_uplink(
    advert: &ToneAdvert,
    payload: &[u8],
    rate: Rate,
    opts: &TxOptions,
    plan: &FrequencyPlan,
    eta: f64,
) -> Result<WifiUplink> {
    let (chips, packet) = synthesize_packet(payload, rate, opts)?;
    if packet.airtime_s() > advert.usable_tone_s() {
        return Err(Error::InvalidParameter(format!(
            "{:.1} µs packet outlasts the {:.1} µs tone",
            packet.airtime_s() * 1e6,
            advert.usable_tone_s() * 1e6
        )));
    }
    let wf = chips_to_backscatter(&chips, plan)?.with_start(advert.detection.backscatter_start_s);
    let reflected = apply_waveform(&advert.iq, &wf, eta)?;
    Ok(WifiUplink { packet, reflected, rx_offset_hz: advert.polarity.tone_offset() + plan.delta_f })
}

/// Wi-Fi receiver front end: channel filter and decimation to 44 Msps.
pub fn wifi_front_end(band: &IqBuffer, rx_offset_hz: f64) -> Result<IqBuffer> {
    let mut rx = downconvert(band, rx_offset_hz, WIFI_RX_RATE, 11e6, RX_TAPS)?;
    rx.center_freq = band.center_freq + rx_offset_hz;
    Ok(rx)
}

/// Direct-path carrier scaled to sit `carrier_db` above the reflection's
/// active power, added to the reflection.
pub fn with_carrier(reflected: &IqBuffer, carrier: &IqBuffer, carrier_db: f64) -> Result<IqBuffer> {
    let pr = crate::channel::active_power(&reflected.samples);
    let pc = crate::channel::active_power(&carrier.samples);
    if pr == 0.0 || pc == 0.0 {
        return Err(Error::ZeroPower);
    }
    let g = (pr / pc * crate::sigcore::from_db(carrier_db)).sqrt();
    reflected.add(&carrier.scaled(g))
}

/// ZigBee uplink. A single advert holds too little tone for most 802.15.4
/// frames, so the incident field is an ideal tone long enough for the
/// packet at the advert's tone frequency.
#[derive(Debug, Clone)]
pub struct ZigbeeUplink {
    pub packet: ZigbeePacket,
    pub reflected: IqBuffer,
    pub rx_offset_hz: f64,
}

pub fn zigbee_uplink(
    ble_channel: BleChannel,
    polarity: Polarity,
    zigbee_channel: u32,
    payload: &[u8],
    eta: f64,
) -> Result<ZigbeeUplink> {
    let tone_freq = polarity.tone_freq(ble_channel);
    let plan = crate::zigbee::plan_for_channel(tone_freq, zigbee_channel)?;
    let (_, wf, packet) = zigbee_synthesize(payload, &plan)?;
    let lead = LEAD_S;
    let n = ((wf.duration() + 2.0 * lead) * ZIGBEE_SIM_RATE).round() as usize;
    let incident = IqBuffer::tone(polarity.tone_offset(), n, ZIGBEE_SIM_RATE, ble_channel.center_freq())?;
    let reflected = apply_waveform(&incident, &wf.with_start(lead), eta)?;
    Ok(ZigbeeUplink { packet, reflected, rx_offset_hz: channel_freq(zigbee_channel)? - ble_channel.center_freq() })
}

pub fn zigbee_front_end(band: &IqBuffer, rx_offset_hz: f64) -> Result<IqBuffer> {
    let mut rx = downconvert(band, rx_offset_hz, ZIGBEE_RX_RATE, 1.5e6, 127)?;
    rx.center_freq = band.center_freq + rx_offset_hz;
    Ok(rx)
}
