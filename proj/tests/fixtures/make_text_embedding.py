"""Byte-histogram text embedding computed straight from a toy fixture file.

usage: make_text_embedding.py toy.bin "prompt" out.f64
"""
import struct
import sys


def main(path, prompt, out):
    data = open(path, "rb").read()
    assert data[:8] == b"VGEMTOY1"
    dims = struct.unpack_from("<9I", data, 16)
    j = dims[7]
    floats = struct.unpack_from("<%df" % (256 * j), data, len(data) - 4 * 256 * j)
    raw = prompt.encode()
    hist = [0.0] * 256
    for b in raw:
        hist[b] += 1.0
    hist = [h / len(raw) for h in hist]
    vec = [sum(hist[r] * floats[r * j + c] for r in range(256)) for c in range(j)]
    with open(out, "wb") as f:
        f.write(struct.pack("<%dd" % j, *vec))


if __name__ == "__main__":
    main(*sys.argv[1:])
