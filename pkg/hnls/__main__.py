from hnls.cli import main

main()
