use super::{BleChannel, Polarity, Whitener, ADV_ACCESS_ADDRESS, BLE_BIT_RATE, MAX_ADV_PAYLOAD};
use crate::error::{Error, Result};
use crate::{bits_to_bytes_lsb, bytes_to_bits_lsb};

/// ADV_NONCONN_IND: non-connectable undirected advertising.
pub const PDU_ADV_NONCONN_IND: u8 = 0x02;

const HEADER_BITS: usize = 16;
const ADV_ADDRESS_BITS: usize = 48;
/// Whitened bits preceding the advertising data: header + advertiser address.
pub const PAYLOAD_WHITENING_OFFSET: usize = HEADER_BITS + ADV_ADDRESS_BITS;

#[derive(Debug, Clone, PartialEq)]
pub struct BleConfig {
    /// Advertiser address as a 48-bit integer (sent little-endian).
    pub adv_address: u64,
    /// Restrict freely settable payload to 24 bytes, as some phone APIs do.
    pub commodity_limit: bool,
}

impl Default for BleConfig {
    fn default() -> Self {
        Self { adv_address: 0xC0FF_EE12_3456, commodity_limit: false }
    }
}

impl BleConfig {
    pub fn max_payload(&self) -> usize {
        if self.commodity_limit {
            24
        } else {
            MAX_ADV_PAYLOAD
        }
    }
}

/// An advertising-channel link-layer packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlePacket {
    pub preamble: u8,
    pub access_address: u32,
    pub header: [u8; 2],
    pub adv_address: [u8; 6],
    pub payload: Vec<u8>,
    pub crc: u32,
}

/// A packet recovered from on-air bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPacket {
    pub packet: BlePacket,
    pub crc_ok: bool,
}

/// BLE CRC-24 (poly x^24+x^10+x^9+x^6+x^4+x^3+x+1, advertising init 0x555555)
/// over bits in on-air order. Returns the register in transmit order: bit 0
/// goes on air first.
pub fn crc24(bits: &[u8]) -> u32 {
    let mut reg: u32 = 0xAA_AAAA; // 0x555555 bit-reversed
    for &b in bits {
        let fb = (reg ^ b as u32) & 1;
        reg >>= 1;
        if fb == 1 {
            reg ^= 0xDA_6000;
        }
    }
    reg
}

fn pdu_bits(header: [u8; 2], adv_address: [u8; 6], payload: &[u8]) -> Vec<u8> {
    let mut pdu = Vec::with_capacity(8 + payload.len());
    pdu.extend_from_slice(&header);
    pdu.extend_from_slice(&adv_address);
    pdu.extend_from_slice(payload);
    bytes_to_bits_lsb(&pdu)
}

fn crc_bits(crc: u32) -> Vec<u8> {
    (0..24).map(|i| ((crc >> i) & 1) as u8).collect()
}

impl BlePacket {
    pub fn payload_len(&self) -> usize {
        self.payload.len()
    }

    /// Total on-air length in bits.
    pub fn air_bits(&self) -> usize {
        (1 + 4 + 2 + 6 + self.payload.len() + 3) * 8
    }

    pub fn airtime_s(&self) -> f64 {
        self.air_bits() as f64 / BLE_BIT_RATE
    }

    pub fn payload_airtime_s(&self) -> f64 {
        (self.payload.len() * 8) as f64 / BLE_BIT_RATE
    }

    /// Bit offset of the first advertising-data bit within the on-air bits.
    pub fn payload_bit_offset(&self) -> usize {
        (1 + 4 + 2 + 6) * 8
    }

    /// Preamble, access address, then whitened PDU and CRC.
    pub fn on_air_bits(&self, channel: BleChannel) -> Vec<u8> {
        let mut bits = bytes_to_bits_lsb(&[self.preamble]);
        bits.extend(bytes_to_bits_lsb(&self.access_address.to_le_bytes()));
        let mut body = pdu_bits(self.header, self.adv_address, &self.payload);
        body.extend(crc_bits(self.crc));
        Whitener::new(channel).apply(&mut body);
        bits.extend(body);
        bits
    }

    /// Field-annotated hex dump, one field per line.
    pub fn annotated_hex(&self) -> String {
        let hex = |b: &[u8]| b.iter().map(|x| format!("{x:02x}")).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        out.push_str(&format!("preamble       {:02x}\n", self.preamble));
        out.push_str(&format!("access_address {}\n", hex(&self.access_address.to_le_bytes())));
        out.push_str(&format!("header         {}\n", hex(&self.header)));
        out.push_str(&format!("adv_address    {}\n", hex(&self.adv_address)));
        out.push_str(&format!("payload        {}\n", hex(&self.payload)));
        out.push_str(&format!("crc            {}\n", hex(&self.crc.to_le_bytes()[..3])));
        out
    }
}

/// Build an advertising packet and its on-air bit sequence.
pub fn build_advertising_packet(channel: BleChannel, payload: &[u8], cfg: &BleConfig) -> Result<(BlePacket, Vec<u8>)> {
    if payload.len() > cfg.max_payload() {
        return Err(Error::ExceedsAdvertisingPayload { len: payload.len(), max: cfg.max_payload() });
    }
    let mut adv_address = [0u8; 6];
    adv_address.copy_from_slice(&cfg.adv_address.to_le_bytes()[..6]);
    build_with_address(channel, payload, adv_address)
}

/// Like [`build_advertising_packet`] with an explicit advertiser address
/// (little-endian byte order) and only the 31-byte payload limit.
pub fn build_with_address(channel: BleChannel, payload: &[u8], adv_address: [u8; 6]) -> Result<(BlePacket, Vec<u8>)> {
    if payload.len() > MAX_ADV_PAYLOAD {
        return Err(Error::ExceedsAdvertisingPayload { len: payload.len(), max: MAX_ADV_PAYLOAD });
    }
    let header = [PDU_ADV_NONCONN_IND, (6 + payload.len()) as u8];
    let crc = crc24(&pdu_bits(header, adv_address, payload));
    let packet = BlePacket {
        preamble: preamble_for(ADV_ACCESS_ADDRESS),
        access_address: ADV_ACCESS_ADDRESS,
        header,
        adv_address,
        payload: payload.to_vec(),
        crc,
    };
    let bits = packet.on_air_bits(channel);
    Ok((packet, bits))
}

/// Alternating preamble whose first bit matches the access address LSB.
fn preamble_for(aa: u32) -> u8 {
    if aa & 1 == 0 {
        0xAA
    } else {
        0x55
    }
}

/// Recover a packet from its on-air bits (starting at the preamble).
pub fn parse_advertising_packet(bits: &[u8], channel: BleChannel) -> Result<ParsedPacket> {
    let fixed = (1 + 4) * 8;
    if bits.len() < fixed + (2 + 6 + 3) * 8 {
        return Err(Error::Parse(format!("{} bits is shorter than an empty advert", bits.len())));
    }
    let preamble = bits_to_bytes_lsb(&bits[..8])[0];
    let aa = bits_to_bytes_lsb(&bits[8..40]);
    let access_address = u32::from_le_bytes([aa[0], aa[1], aa[2], aa[3]]);
    let mut body = bits[fixed..].to_vec();
    Whitener::new(channel).apply(&mut body);
    let header_bytes = bits_to_bytes_lsb(&body[..16]);
    let header = [header_bytes[0], header_bytes[1]];
    let pdu_len = header[1] as usize;
    if pdu_len < 6 || body.len() < (2 + pdu_len + 3) * 8 {
        return Err(Error::Parse(format!("length field {pdu_len} inconsistent with bit count")));
    }
    let pdu_end = (2 + pdu_len) * 8;
    let pdu = bits_to_bytes_lsb(&body[..pdu_end]);
    let mut adv_address = [0u8; 6];
    adv_address.copy_from_slice(&pdu[2..8]);
    let payload = pdu[8..].to_vec();
    let crc = body[pdu_end..pdu_end + 24].iter().enumerate().fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i));
    let crc_ok = crc24(&body[..pdu_end]) == crc;
    Ok(ParsedPacket { packet: BlePacket { preamble, access_address, header, adv_address, payload, crc }, crc_ok })
}

/// Payload bytes whose whitened on-air bits are all zeros or all ones.
///
/// The whitener runs from the first header bit, so the payload-aligned
/// keystream segment starts after the header and advertiser address.
pub fn single_tone_payload(channel: BleChannel, polarity: Polarity, n_bytes: usize) -> Result<Vec<u8>> {
    if n_bytes > MAX_ADV_PAYLOAD {
        return Err(Error::ExceedsAdvertisingPayload { len: n_bytes, max: MAX_ADV_PAYLOAD });
    }
    Ok(tone_bytes(channel, polarity, PAYLOAD_WHITENING_OFFSET, n_bytes))
}

/// Advertiser address whose whitened bits match the tone polarity, so the
/// tone starts right after the header instead of after the address.
pub fn single_tone_adv_address(channel: BleChannel, polarity: Polarity) -> [u8; 6] {
    let b = tone_bytes(channel, polarity, HEADER_BITS, 6);
    [b[0], b[1], b[2], b[3], b[4], b[5]]
}

fn tone_bytes(channel: BleChannel, polarity: Polarity, offset: usize, n_bytes: usize) -> Vec<u8> {
    let mut w = Whitener::new(channel);
    w.advance(offset);
    let flip = match polarity {
        Polarity::Zeros => 0,
        Polarity::Ones => 1,
    };
    let bits: Vec<u8> = w.take(n_bytes * 8).map(|k| k ^ flip).collect();
    bits_to_bytes_lsb(&bits)
}

pub fn bits_to_text(bits: &[u8]) -> String {
    let mut s = String::with_capacity(bits.len() * 2);
    for b in bits {
        s.push(if *b == 0 { '0' } else { '1' });
        s.push('\n');
    }
    s
}

pub fn bits_from_text(text: &str) -> Result<Vec<u8>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match l.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(Error::Parse(format!("bad bit line {other:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ble::whitening_sequence;
    use proptest::prelude::*;

    fn ch(c: u32) -> BleChannel {
        BleChannel::new(c).unwrap()
    }

    #[test]
    fn full_payload_airtime_is_248us() {
        let (p, bits) = build_advertising_packet(ch(38), &[0x5a; 31], &BleConfig::default()).unwrap();
        assert!((p.payload_airtime_s() - 248e-6).abs() < 1e-12);
        assert_eq!(bits.len(), p.air_bits());
    }

    #[test]
    fn empty_payload_is_128_bits() {
        let (p, bits) = build_advertising_packet(ch(37), &[], &BleConfig::default()).unwrap();
        assert_eq!(bits.len(), 128);
        assert!((p.airtime_s() - 128e-6).abs() < 1e-12);
    }

    #[test]
    fn oversize_payload_rejected() {
        let cfg = BleConfig::default();
        assert!(build_advertising_packet(ch(37), &[0; 32], &cfg).is_err());
        let commodity = BleConfig { commodity_limit: true, ..cfg };
        assert!(build_advertising_packet(ch(37), &[0; 25], &commodity).is_err());
        assert!(build_advertising_packet(ch(37), &[0; 24], &commodity).is_ok());
        assert!(single_tone_payload(ch(37), Polarity::Ones, 32).is_err());
    }

    #[test]
    fn access_address_and_preamble() {
        let (p, bits) = build_advertising_packet(ch(39), b"hi", &BleConfig::default()).unwrap();
        assert_eq!(p.access_address, 0x8E89_BED6);
        assert!(bits[..8].windows(2).all(|w| w[0] != w[1]));
        assert_eq!(bits[0], bits[8]);
    }

    #[test]
    fn whitening_is_an_involution() {
        let (p, _) = build_advertising_packet(ch(38), b"abcdef", &BleConfig::default()).unwrap();
        let mut body = pdu_bits(p.header, p.adv_address, &p.payload);
        let orig = body.clone();
        Whitener::new(ch(38)).apply(&mut body);
        assert_ne!(body, orig);
        Whitener::new(ch(38)).apply(&mut body);
        assert_eq!(body, orig);
    }

    #[test]
    fn tone_payload_follows_aligned_keystream() {
        for c in [37, 38, 39] {
            let ks = whitening_sequence(ch(c), PAYLOAD_WHITENING_OFFSET + 31 * 8);
            let seg = &ks[PAYLOAD_WHITENING_OFFSET..];
            let zeros = bytes_to_bits_lsb(&single_tone_payload(ch(c), Polarity::Zeros, 31).unwrap());
            let ones = bytes_to_bits_lsb(&single_tone_payload(ch(c), Polarity::Ones, 31).unwrap());
            assert_eq!(zeros, seg);
            assert!(ones.iter().zip(seg).all(|(a, b)| a ^ b == 1));
        }
    }

    #[test]
    fn tone_payload_whitens_to_constant_on_air() {
        for pol in [Polarity::Zeros, Polarity::Ones] {
            let payload = single_tone_payload(ch(38), pol, 31).unwrap();
            let (p, bits) = build_advertising_packet(ch(38), &payload, &BleConfig::default()).unwrap();
            let off = p.payload_bit_offset();
            let want = if pol == Polarity::Ones { 1 } else { 0 };
            assert!(bits[off..off + 248].iter().all(|&b| b == want));
        }
    }

    #[test]
    fn tone_address_extends_the_tone() {
        let pol = Polarity::Ones;
        let addr = single_tone_adv_address(ch(38), pol);
        let payload = single_tone_payload(ch(38), pol, 31).unwrap();
        let (p, bits) = build_with_address(ch(38), &payload, addr).unwrap();
        let start = p.payload_bit_offset() - 48;
        assert!(bits[start..start + 48 + 248].iter().all(|&b| b == 1));
    }

    #[test]
    fn crc24_matches_catalogue_check_value() {
        // CRC-24/BLE check value over "123456789".
        assert_eq!(crc24(&bytes_to_bits_lsb(b"123456789")), 0xC2_5A56);
    }

    #[test]
    fn bit_file_roundtrip() {
        let (_, bits) = build_advertising_packet(ch(37), b"xyz", &BleConfig::default()).unwrap();
        assert_eq!(bits_from_text(&bits_to_text(&bits)).unwrap(), bits);
    }

    #[test]
    fn annotated_hex_lists_fields() {
        let (p, _) = build_advertising_packet(ch(37), &[1, 2], &BleConfig::default()).unwrap();
        let dump = p.annotated_hex();
        assert!(dump.contains("access_address d6 be 89 8e"));
        assert!(dump.contains("adv_address    56 34 12 ee ff c0"));
        assert!(dump.contains("payload        01 02"));
    }

    proptest! {
        #[test]
        fn parse_roundtrip_and_single_flip_detected(
            payload in proptest::collection::vec(any::<u8>(), 0..=31),
            c in 0u32..40,
            flip in any::<prop::sample::Index>(),
        ) {
            let (p, bits) = build_advertising_packet(ch(c), &payload, &BleConfig::default()).unwrap();
            let parsed = parse_advertising_packet(&bits, ch(c)).unwrap();
            prop_assert!(parsed.crc_ok);
            prop_assert_eq!(&parsed.packet, &p);

            // flip one bit inside header/address/payload, keeping the length field intact
            let start = 40 + 16;
            let span = (6 + payload.len()) * 8;
            let mut bad = bits.clone();
            bad[start + flip.index(span)] ^= 1;
            let parsed = parse_advertising_packet(&bad, ch(c)).unwrap();
            prop_assert!(!parsed.crc_ok);
        }
    }
}
