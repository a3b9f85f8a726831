#!/usr/bin/env python3
"""Regenerate src/emoji_table.inc from the `emoji` package's English names.

Usage: python3 scripts/gen_emoji_table.py > src/emoji_table.inc
"""
import emoji


def c_escape(s: str) -> str:
    return "".join(f"\\x{b:02x}" for b in s.encode("utf-8"))


def main() -> None:
    rows = sorted(
        (e, data["en"].strip(":")) for e, data in emoji.EMOJI_DATA.items() if "en" in data
    )
    print(f"// Generated by scripts/gen_emoji_table.py from emoji {emoji.__version__}. Do not edit.")
    print(f"// {len(rows)} entries, sorted by UTF-8 byte sequence.")
    for e, name in rows:
        # Split the literal after each escape run so a following hex-looking
        # character in the name can't extend the escape.
        print(f'{{"{c_escape(e)}"sv, "{name.replace(chr(92), chr(92) * 2).replace(chr(34), chr(92) + chr(34))}"sv}},')


if __name__ == "__main__":
    main()
