"""Print every assembled prompt family for the built-in mini fixture.

The same text is what `rubriclearn prompts dump` writes to disk and what the
snapshot tests pin byte-for-byte. Useful for eyeballing layout changes.

Run:  python demos/demo_prompt_gallery.py [--full]
"""

import sys

from rubriclearn.fixtures import (
    PROMPT_FAMILIES,
    build_fixture_prompts,
    extra_fixture_prompts,
)


def show(name, bundle, full=False):
    print("=" * 72)
    print(f"family: {name}   tag: {bundle.tag}   schema: {bundle.schema_id}")
    print("=" * 72)
    lines = (bundle.system_text + "\n--- user ---\n" + bundle.user_text).splitlines()
    if not full and len(lines) > 24:
        shown = lines[:20] + [f"... ({len(lines) - 20} more lines)"]
    else:
        shown = lines
    print("\n".join(shown))
    print()


def main():
    full = "--full" in sys.argv
    prompts = build_fixture_prompts("mini")
    for family in PROMPT_FAMILIES:
        show(family, prompts[family], full)
    print("#" * 72)
    print("# variants beyond the seven dumped families")
    print("#" * 72)
    for name, bundle in sorted(extra_fixture_prompts().items()):
        show(name, bundle, full)


if __name__ == "__main__":
    main()
