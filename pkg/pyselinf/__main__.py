"""Run the pyselinf command line with python -m pyselinf"""
import sys

from .cli.main import main

sys.exit(main())
