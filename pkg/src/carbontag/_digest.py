"""FNV-1a 128-bit digest, used for artifact checksums and content ids.

Non-cryptographic: suitable for integrity checks only. The browser-side
evaluator reimplements the same few lines with BigInt, which keeps the
serverless artifact verifiable without any dependency.
"""

FNV128_PRIME = 0x0000000001000000000000000000013B
FNV128_OFFSET_BASIS = 0x6C62272E07BB014262B821756295C58D
_MASK = (1 << 128) - 1


def fnv1a_128(data: bytes) -> str:
    """Hex digest (32 chars) of the FNV-1a 128-bit hash of the input."""
    h = FNV128_OFFSET_BASIS
    for byte in data:
        h = ((h ^ byte) * FNV128_PRIME) & _MASK
    return f"{h:032x}"
