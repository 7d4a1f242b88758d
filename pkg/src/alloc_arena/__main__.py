import sys

from alloc_arena.cli import main

sys.exit(main())
