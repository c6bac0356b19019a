from runway_merge.cli import main

main()
