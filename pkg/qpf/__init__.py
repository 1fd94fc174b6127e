"""qpf: qutrit Clifford+T gates from spin-1 pulses and two-mode Kerr optics."""

__version__ = '0.1.0'
