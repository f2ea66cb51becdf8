# Volume lab package
