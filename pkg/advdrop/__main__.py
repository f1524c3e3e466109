from advdrop.main import run

run()
