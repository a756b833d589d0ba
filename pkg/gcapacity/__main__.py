'''
Allows `python -m gcapacity <command>`.
'''
import sys

from .system.cli import main

sys.exit(main())
