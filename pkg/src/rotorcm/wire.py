"""UDP telemetry protocol: packet codec, collector, and stream emitter.

Wire format (all little-endian):

    magic      u16  0x5643
    version    u8   1
    sensor_id  u8   1 = center, 2 = outer
    sequence   u32  monotone per sensor
    sample_count u16  1..256
    timestamp_us u64  time of first sample in the packet
    payload    sample_count x 3 x i16 raw counts (3.9 mg/LSB)
    crc32      u32  standard CRC-32 over all preceding bytes

Raw 16-bit counts on the wire match the accelerometer's native output;
conversion to g happens at the collector.
"""

import socket
import struct
import time
import zlib
from dataclasses import dataclass

import numpy as np

MAGIC = 0x5643
VERSION = 1
HEADER_FMT = "<HBBIHQ"
HEADER_LEN = struct.calcsize(HEADER_FMT)  # 18
CRC_LEN = 4
MAX_SAMPLES_PER_PACKET = 256
LSB_G = 0.0039  # 3.9 mg per count


class ProtocolError(ValueError):
    pass


class BadMagic(ProtocolError):
    pass


class BadVersion(ProtocolError):
    pass


class Truncated(ProtocolError):
    pass


class ChecksumMismatch(ProtocolError):
    pass


class TransportError(OSError):
    pass


@dataclass
class TelemetryPacket:
    sensor_id: int
    sequence: int
    timestamp_us: int
    samples: np.ndarray  # (sample_count, 3) int16 raw counts

    @property
    def sample_count(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, TelemetryPacket)
            and self.sensor_id == other.sensor_id
            and self.sequence == other.sequence
            and self.timestamp_us == other.timestamp_us
            and np.array_equal(self.samples, other.samples)
        )


@dataclass
class CollectorStats:
    packets_received: int = 0
    duplicates_dropped: int = 0
    checksum_failures: int = 0
    bad_magic: int = 0
    bad_version: int = 0
    truncated: int = 0
    gaps_detected: int = 0


def g_to_counts(g: np.ndarray) -> np.ndarray:
    counts = np.round(np.asarray(g) / LSB_G)
    return np.clip(counts, -32768, 32767).astype(np.int16)


def counts_to_g(counts: np.ndarray) -> np.ndarray:
    return np.asarray(counts, dtype=np.float64) * LSB_G


def encode_packet(sensor_id: int, sequence: int, timestamp_us: int, samples) -> bytes:
    samples = np.asarray(samples, dtype=np.int16).reshape(-1, 3)
    n = samples.shape[0]
    if not 1 <= n <= MAX_SAMPLES_PER_PACKET:
        raise ProtocolError(f"sample_count {n} outside 1..{MAX_SAMPLES_PER_PACKET}")
    head = struct.pack(HEADER_FMT, MAGIC, VERSION, sensor_id, sequence, n, timestamp_us)
    body = head + samples.astype("<i2").tobytes()
    return body + struct.pack("<I", zlib.crc32(body))


def decode_packet(data: bytes) -> TelemetryPacket:
    """Parse and validate one datagram.

    The CRC is checked before any field is interpreted, so any bit
    corruption of a well-formed packet surfaces as ChecksumMismatch.
    """
    if len(data) < HEADER_LEN + 6 + CRC_LEN:
        raise Truncated(f"packet of {len(data)} bytes is shorter than the minimum")
    body, crc_bytes = data[:-CRC_LEN], data[-CRC_LEN:]
    (crc,) = struct.unpack("<I", crc_bytes)
    if zlib.crc32(body) != crc:
        raise ChecksumMismatch("crc32 mismatch")
    magic, version, sensor_id, sequence, n, ts = struct.unpack(HEADER_FMT, body[:HEADER_LEN])
    if magic != MAGIC:
        raise BadMagic(f"magic 0x{magic:04x}")
    if version != VERSION:
        raise BadVersion(f"version {version}")
    if not 1 <= n <= MAX_SAMPLES_PER_PACKET or len(body) != HEADER_LEN + 6 * n:
        raise Truncated(f"length {len(data)} inconsistent with sample_count {n}")
    samples = np.frombuffer(body, dtype="<i2", offset=HEADER_LEN).reshape(n, 3)
    return TelemetryPacket(sensor_id, sequence, ts, samples.astype(np.int16))


def reassemble(
    packets, sensors=(1, 2), stats: CollectorStats | None = None
) -> tuple[dict[int, np.ndarray], CollectorStats]:
    """Order packets per sensor, drop duplicates, mark gaps with NaN.

    Returns per-sensor (n, 3) float arrays in g.  Missing sequences are
    filled with NaN runs sized by the sensor's modal sample_count and
    counted once per missing sequence number.  Pure function of the
    packet multiset: invariant under permutation and duplication.
    """
    if stats is None:
        stats = CollectorStats()
    by_sensor: dict[int, dict[int, TelemetryPacket]] = {s: {} for s in sensors}
    for pkt in packets:
        if pkt.sensor_id not in by_sensor:
            continue
        seen = by_sensor[pkt.sensor_id]
        if pkt.sequence in seen:
            stats.duplicates_dropped += 1
        else:
            seen[pkt.sequence] = pkt
    streams: dict[int, np.ndarray] = {}
    for sensor in sensors:
        seen = by_sensor[sensor]
        if not seen:
            streams[sensor] = np.empty((0, 3))
            continue
        counts = np.array([p.sample_count for p in seen.values()])
        gap_len = int(np.bincount(counts).argmax())
        chunks = []
        prev_seq = None
        for seq in sorted(seen):
            if prev_seq is not None and seq > prev_seq + 1:
                missing = seq - prev_seq - 1
                stats.gaps_detected += missing
                chunks.append(np.full((missing * gap_len, 3), np.nan))
            chunks.append(counts_to_g(seen[seq].samples))
            prev_seq = seq
        streams[sensor] = np.vstack(chunks)
    return streams, stats


class Collector:
    """Ingests datagrams, keeps protocol statistics, reassembles streams."""

    def __init__(self, sensors=(1, 2)):
        self.sensors = tuple(sensors)
        self.stats = CollectorStats()
        self.packets: list[TelemetryPacket] = []

    def ingest(self, data: bytes) -> TelemetryPacket | None:
        self.stats.packets_received += 1
        try:
            pkt = decode_packet(data)
        except ChecksumMismatch:
            self.stats.checksum_failures += 1
            return None
        except BadMagic:
            self.stats.bad_magic += 1
            return None
        except BadVersion:
            self.stats.bad_version += 1
            return None
        except Truncated:
            self.stats.truncated += 1
            return None
        self.packets.append(pkt)
        return pkt

    def streams(self) -> dict[int, np.ndarray]:
        streams, _ = reassemble(self.packets, self.sensors, self.stats)
        return streams

    def listen(self, addr: str, port: int, idle_timeout_s: float = 2.0,
               expected_packets: int | None = None) -> None:
        """Receive datagrams until idle for idle_timeout_s (or count reached)."""
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            sock.bind((addr, port))
            sock.settimeout(idle_timeout_s)
            received = 0
            while expected_packets is None or received < expected_packets:
                try:
                    data, _ = sock.recvfrom(65535)
                except socket.timeout:
                    break
                received += 1
                self.ingest(data)
        except OSError as exc:
            raise TransportError(str(exc)) from exc
        finally:
            sock.close()


def packetize_trial(trial, samples_per_packet: int = 250) -> list[bytes]:
    """Encode a trial's two sensor streams into sequenced datagrams."""
    if not 1 <= samples_per_packet <= MAX_SAMPLES_PER_PACKET:
        raise ProtocolError(
            f"samples_per_packet {samples_per_packet} outside 1..{MAX_SAMPLES_PER_PACKET}"
        )
    out = []
    us_per_sample = 1e6 / trial.sample_rate_hz
    for s_idx, sensor in enumerate((1, 2)):
        stream = g_to_counts(trial.data[s_idx].T)  # (n, 3)
        for seq, start in enumerate(range(0, stream.shape[0], samples_per_packet)):
            chunk = stream[start : start + samples_per_packet]
            ts = int(round(start * us_per_sample))
            out.append(encode_packet(sensor, seq, ts, chunk))
    return out


def emit_stream(
    trial,
    dest: tuple[str, int],
    samples_per_packet: int = 250,
    realtime: bool = False,
    pps: float | None = None,
) -> dict:
    """Send a trial over UDP; every sample exactly once, in sequence order.

    realtime paces packets to the sample rate; pps overrides with an
    explicit packets-per-second cap.
    """
    datagrams = packetize_trial(trial, samples_per_packet)
    if realtime:
        interval = samples_per_packet / trial.sample_rate_hz
    elif pps:
        interval = 1.0 / pps
    else:
        interval = 0.0
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sent = 0
    bytes_sent = 0
    try:
        for dg in datagrams:
            sock.sendto(dg, dest)
            sent += 1
            bytes_sent += len(dg)
            if interval:
                time.sleep(interval)
    except OSError as exc:
        raise TransportError(str(exc)) from exc
    finally:
        sock.close()
    return {"packets_sent": sent, "bytes_sent": bytes_sent}
